#ifndef CTQW_IO_CSV_HPP
#define CTQW_IO_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/observables.hpp"

namespace ctqw::io {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    if (r.ec != std::errc{}) throw IoError("format_double: conversion failed");
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc{} || r.ptr != last)
        throw InvalidArgument("not a number: '" + std::string(s) + "'");
    return v;
}

/// Column-oriented CSV table. Cells are kept as text; numeric cells are
/// always written with format_double.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t columns() const noexcept { return header.size(); }

    void add_row(const std::vector<double>& values)
    {
        std::vector<std::string> r;
        r.reserve(values.size());
        for (double v : values) r.push_back(format_double(v));
        add_row(std::move(r));
    }

    void add_row(std::vector<std::string> cells)
    {
        if (cells.size() != header.size())
            throw InvalidArgument("Table: row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        rows.push_back(std::move(cells));
    }

    std::size_t column_index(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw InvalidArgument("Table: no column '" + std::string(name) + "'");
    }

    std::vector<double> numeric_column(std::size_t c) const
    {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(parse_double(r.at(c)));
        return v;
    }

    std::string to_csv() const
    {
        std::string out;
        auto put_line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        put_line(header);
        for (const auto& r : rows) put_line(r);
        return out;
    }
};

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) return cells;
        start = comma + 1;
    }
}

inline Table parse_csv(std::string_view text)
{
    Table t;
    bool first = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (first) {
            t.header = split_csv_line(line);
            first = false;
        } else {
            t.add_row(split_csv_line(line));
        }
    }
    if (first) throw IoError("parse_csv: no header row");
    return t;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline Table read_table(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

inline void write_table(const Table& t, const std::filesystem::path& path) { write_file(path, t.to_csv()); }

// ---------------------------------------------------------------------------
// Result tables

inline Table series_table(const TimeSeries& s)
{
    Table t;
    t.header = {"t[1/gamma]", "sigma[sites]", "mean[sites]", "p0[-]", "trapped[-]", "leakage[-]"};
    for (std::size_t i = 0; i < s.size(); ++i)
        t.add_row({s.times[i], s.sigma[i], s.mean_pos[i], s.p_defect[i], s.trapped[i], s.leakage[i]});
    return t;
}

inline const char* axis_unit(SweepParam p)
{
    switch (p) {
    case SweepParam::xi: return "[-]";
    case SweepParam::theta:
    case SweepParam::theta_minus:
    case SweepParam::theta_plus: return "[rad]";
    case SweepParam::omega: return "[gamma]";
    case SweepParam::sigma0: return "[sites]";
    }
    return "[-]";
}

inline Table sweep_table(const SweepResult& r)
{
    Table t;
    for (const auto& a : r.grid.axes) t.header.push_back(std::string(to_string(a.param)) + axis_unit(a.param));
    for (const char* c : {"ratio[-]", "sigma[sites]", "sigma_h[sites]", "p0[-]", "trapped[-]", "mean[sites]",
                          "alpha[gamma]", "leakage_max[-]"})
        t.header.emplace_back(c);
    for (const auto& rec : r.records) {
        std::vector<double> row = rec.parameters;
        for (double v : {rec.sigma_ratio, rec.sigma, rec.sigma_h, rec.p_defect, rec.trapped, rec.mean_pos,
                         rec.alpha, rec.leakage_max})
            row.push_back(v);
        t.add_row(row);
    }
    return t;
}

/// One column per snapshot, labelled with its time.
inline Table distribution_table(const SiteGrid& grid, const std::vector<std::string>& labels,
                                const std::vector<const std::vector<double>*>& columns)
{
    Table t;
    t.header.push_back("j[sites]");
    for (const auto& l : labels) t.header.push_back("P_" + l + "[-]");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{static_cast<double>(grid.site(i))};
        for (const auto* c : columns) row.push_back(c->at(i));
        t.add_row(row);
    }
    return t;
}

inline void write_table(const TimeSeries& s, const std::filesystem::path& path) { write_table(series_table(s), path); }

inline void write_table(const SweepResult& r, const std::filesystem::path& path) { write_table(sweep_table(r), path); }

}  // namespace ctqw::io

#endif  // CTQW_IO_CSV_HPP
