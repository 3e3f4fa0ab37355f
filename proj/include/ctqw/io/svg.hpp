#ifndef CTQW_IO_SVG_HPP
#define CTQW_IO_SVG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/io/csv.hpp"

namespace ctqw::io {

struct Curve {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct LineChart {
    std::string title;
    /// Second title line, normally the config digest.
    std::string subtitle;
    std::string x_label;
    std::string y_label;
    std::vector<Curve> curves;
    bool log_x = false;
};

/// values[iy * x.size() + ix]; x and y are cell centres.
struct Heatmap {
    std::string title;
    std::string subtitle;
    std::string x_label;
    std::string y_label;
    std::string value_label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> values;
};

enum class PlotKind { line, multiline, heatmap };

namespace svg_detail {

inline constexpr double width = 720, height = 480;
inline constexpr double left = 80, right = 170, top = 60, bottom = 60;

inline constexpr std::array<const char*, 8> palette{"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#17becf", "#8c564b", "#000000"};

// Heatmap ramp (low to high), interpolated linearly in sRGB.
inline constexpr std::array<std::array<int, 3>, 5> ramp{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                          {94, 201, 98}, {253, 231, 37}}};

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

inline std::string tick_label(double v)
{
    char buf[32];
    if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3))
        std::snprintf(buf, sizeof buf, "%.0e", v);
    else
        std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

inline std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string ramp_color(double u)
{
    if (!std::isfinite(u)) return "#808080";
    u = std::clamp(u, 0.0, 1.0) * (ramp.size() - 1);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(u), ramp.size() - 2);
    const double f = u - static_cast<double>(k);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(ramp[k][c] + f * (ramp[k + 1][c] - ramp[k][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

/// Round tick positions (1, 2, 5 times a power of ten) covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    void pad()
    {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi == lo) {
            const double d = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
            lo -= d;
            hi += d;
        }
    }
};

inline void header(std::string& out, const std::string& title, const std::string& subtitle)
{
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<title>" + escape(title) + (subtitle.empty() ? "" : " | " + escape(subtitle)) + "</title>\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";
    if (!subtitle.empty())
        out += "<text x=\"" + num(width / 2) + "\" y=\"42\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555555\">" +
               escape(subtitle) + "</text>\n";
}

inline void axes(std::string& out, const std::string& x_label, const std::string& y_label)
{
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    out += "<g class=\"axes\" stroke=\"#000000\" fill=\"none\">\n";
    out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\"/>\n";
    out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\"/>\n";
    out += "</g>\n";
    out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(height - 18) + "\" text-anchor=\"middle\">" +
           escape(x_label) + "</text>\n";
    out += "<text x=\"20\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           num((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
}

inline void x_tick(std::string& out, double px, const std::string& label)
{
    const double y0 = height - bottom;
    out += "<line class=\"tick\" x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) + "\" y2=\"" +
           num(y0 + 5) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" + escape(label) +
           "</text>\n";
}

inline void y_tick(std::string& out, double py, const std::string& label)
{
    out += "<line class=\"tick\" x1=\"" + num(left - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(py) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + escape(label) +
           "</text>\n";
}

}  // namespace svg_detail

inline std::string render_line_chart(const LineChart& c, PlotKind kind = PlotKind::multiline)
{
    using namespace svg_detail;
    if (kind == PlotKind::heatmap) throw InvalidArgument("render_line_chart: heatmap kind needs a Heatmap");
    if (c.curves.empty()) throw EmptyResult("render_line_chart: no curves");
    if (kind == PlotKind::line && c.curves.size() != 1)
        throw InvalidArgument("render_line_chart: line plots take exactly one curve");
    Range xr, yr;
    for (const auto& cv : c.curves) {
        if (cv.x.size() != cv.y.size()) throw InvalidArgument("render_line_chart: x and y lengths differ");
        if (cv.x.empty()) throw EmptyResult("render_line_chart: empty curve '" + cv.label + "'");
        for (std::size_t i = 0; i < cv.x.size(); ++i) {
            if (c.log_x && !(cv.x[i] > 0)) continue;
            xr.add(c.log_x ? std::log10(cv.x[i]) : cv.x[i]);
            yr.add(cv.y[i]);
        }
    }
    xr.pad();
    yr.pad();
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

    std::string out;
    header(out, c.title, c.subtitle);
    axes(out, c.x_label, c.y_label);
    if (c.log_x) {
        for (double e = std::ceil(xr.lo); e <= xr.hi + 1e-12; e += 1.0) x_tick(out, px(e), tick_label(std::pow(10.0, e)));
    } else {
        for (double v : nice_ticks(xr.lo, xr.hi)) x_tick(out, px(v), tick_label(v));
    }
    for (double v : nice_ticks(yr.lo, yr.hi)) y_tick(out, py(v), tick_label(v));

    for (std::size_t k = 0; k < c.curves.size(); ++k) {
        const auto& cv = c.curves[k];
        const char* color = palette[k % palette.size()];
        std::string d;
        bool pen_up = true;
        for (std::size_t i = 0; i < cv.x.size(); ++i) {
            if ((c.log_x && !(cv.x[i] > 0)) || !std::isfinite(cv.y[i])) {
                pen_up = true;
                continue;
            }
            const double xv = c.log_x ? std::log10(cv.x[i]) : cv.x[i];
            d += (pen_up ? "M" : " L") + num(px(xv)) + " " + num(py(cv.y[i]));
            pen_up = false;
        }
        out += "<path class=\"series\" d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"" + (cv.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    }
    if (kind == PlotKind::multiline) {
        out += "<g class=\"legend\">\n";
        for (std::size_t k = 0; k < c.curves.size(); ++k) {
            const double ly = top + 10 + 20.0 * static_cast<double>(k);
            const double lx = width - right + 20;
            out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" + num(ly) +
                   "\" stroke=\"" + palette[k % palette.size()] + "\" stroke-width=\"2\"" +
                   (c.curves[k].dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
            out += "<text class=\"legend-entry\" x=\"" + num(lx + 30) + "\" y=\"" + num(ly + 4) + "\">" +
                   escape(c.curves[k].label) + "</text>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Colour scale runs linearly from the smallest to the largest finite value
/// through the five-stop ramp dark purple, blue, teal, green, yellow.
inline std::string render_heatmap(const Heatmap& h)
{
    using namespace svg_detail;
    const std::size_t nx = h.x.size(), ny = h.y.size();
    if (nx == 0 || ny == 0 || h.values.empty()) throw EmptyResult("render_heatmap: no cells");
    if (h.values.size() != nx * ny) throw InvalidArgument("render_heatmap: value count does not match the axes");
    Range vr;
    for (double v : h.values) vr.add(v);
    vr.pad();
    auto edges = [](const std::vector<double>& c) {
        std::vector<double> e(c.size() + 1);
        if (c.size() == 1) {
            e[0] = c[0] - 0.5;
            e[1] = c[0] + 0.5;
            return e;
        }
        for (std::size_t i = 1; i < c.size(); ++i) e[i] = 0.5 * (c[i - 1] + c[i]);
        e[0] = c[0] - (e[1] - c[0]);
        e[c.size()] = c.back() + (c.back() - e[c.size() - 1]);
        return e;
    };
    const auto ex = edges(h.x), ey = edges(h.y);
    const double xlo = std::min(ex.front(), ex.back()), xhi = std::max(ex.front(), ex.back());
    const double ylo = std::min(ey.front(), ey.back()), yhi = std::max(ey.front(), ey.back());
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    auto px = [&](double v) { return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0); };
    auto py = [&](double v) { return y0 - (v - ylo) / (yhi - ylo) * (y0 - y1); };

    std::string out;
    header(out, h.title, h.subtitle);
    out += "<g class=\"cells\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double ax = px(ex[ix]), bx = px(ex[ix + 1]);
            const double ay = py(ey[iy]), by = py(ey[iy + 1]);
            const double v = h.values[iy * nx + ix];
            out += "<rect class=\"cell\" x=\"" + num(std::min(ax, bx)) + "\" y=\"" + num(std::min(ay, by)) +
                   "\" width=\"" + num(std::abs(bx - ax)) + "\" height=\"" + num(std::abs(by - ay)) + "\" fill=\"" +
                   ramp_color((v - vr.lo) / (vr.hi - vr.lo)) + "\"/>\n";
        }
    out += "</g>\n";
    axes(out, h.x_label, h.y_label);
    for (double v : nice_ticks(xlo, xhi)) x_tick(out, px(v), tick_label(v));
    for (double v : nice_ticks(ylo, yhi)) y_tick(out, py(v), tick_label(v));

    // Colour bar legend.
    const double bx = width - right + 30, bw = 18;
    out += "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n";
    for (std::size_t k = 0; k < ramp.size(); ++k)
        out += "<stop offset=\"" + num(static_cast<double>(k) / (ramp.size() - 1)) + "\" stop-color=\"" +
               ramp_color(static_cast<double>(k) / (ramp.size() - 1)) + "\"/>\n";
    out += "</linearGradient></defs>\n";
    out += "<g class=\"legend\">\n";
    out += "<rect class=\"colorbar\" x=\"" + num(bx) + "\" y=\"" + num(y1) + "\" width=\"" + num(bw) + "\" height=\"" +
           num(y0 - y1) + "\" fill=\"url(#ramp)\" stroke=\"#000000\"/>\n";
    for (double v : nice_ticks(vr.lo, vr.hi, 5)) {
        const double yy = y0 - (v - vr.lo) / (vr.hi - vr.lo) * (y0 - y1);
        out += "<text x=\"" + num(bx + bw + 6) + "\" y=\"" + num(yy + 4) + "\">" + escape(tick_label(v)) + "</text>\n";
    }
    out += "<text x=\"" + num(bx) + "\" y=\"" + num(y1 - 8) + "\">" + escape(h.value_label) + "</text>\n";
    out += "</g>\n</svg>\n";
    return out;
}

inline void render_plot(const LineChart& c, PlotKind kind, const std::filesystem::path& path)
{
    write_file(path, render_line_chart(c, kind));
}

inline void render_plot(const Heatmap& h, const std::filesystem::path& path) { write_file(path, render_heatmap(h)); }

// ---------------------------------------------------------------------------
// Charts for result types

inline LineChart sweep_chart(const SweepResult& r, std::string title, std::string subtitle,
                             double SweepRecord::*field = &SweepRecord::sigma_ratio, std::string y_label = "sigma_d/sigma")
{
    if (r.grid.axes.size() != 1) throw InvalidArgument("sweep_chart: one-axis sweeps only");
    if (r.records.empty()) throw EmptyResult("sweep_chart: no records");
    LineChart c;
    c.title = std::move(title);
    c.subtitle = std::move(subtitle);
    c.x_label = to_string(r.grid.axes[0].param);
    c.y_label = std::move(y_label);
    c.log_x = r.grid.axes[0].param == SweepParam::omega;
    Curve cv;
    cv.label = c.y_label;
    for (const auto& rec : r.records) {
        cv.x.push_back(rec.parameters[0]);
        cv.y.push_back(rec.*field);
    }
    c.curves.push_back(std::move(cv));
    return c;
}

/// Two-axis sweep; the second axis runs along x.
inline Heatmap sweep_heatmap(const SweepResult& r, std::string title, std::string subtitle)
{
    if (r.grid.axes.size() != 2) throw InvalidArgument("sweep_heatmap: two-axis sweeps only");
    if (r.records.empty()) throw EmptyResult("sweep_heatmap: no records");
    Heatmap h;
    h.title = std::move(title);
    h.subtitle = std::move(subtitle);
    h.y_label = to_string(r.grid.axes[0].param);
    h.x_label = to_string(r.grid.axes[1].param);
    h.value_label = "sigma_d/sigma";
    h.y = r.grid.axes[0].values();
    h.x = r.grid.axes[1].values();
    for (const auto& rec : r.records) h.values.push_back(rec.sigma_ratio);
    return h;
}

inline Curve sigma_curve(const TimeSeries& s, std::string label, bool dashed = false)
{
    return {std::move(label), s.times, s.sigma, dashed};
}

}  // namespace ctqw::io

#endif  // CTQW_IO_SVG_HPP
