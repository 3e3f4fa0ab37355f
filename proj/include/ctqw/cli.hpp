#ifndef CTQW_CLI_HPP
#define CTQW_CLI_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/io/csv.hpp"
#include "ctqw/io/manifest.hpp"
#include "ctqw/io/svg.hpp"
#include "ctqw/reproduce.hpp"

namespace ctqw::cli {

using io::json;

enum class Command { evolve, sweep, contour, omega_scan, parrondo, reproduce, verify };

inline const char* to_string(Command c)
{
    switch (c) {
    case Command::evolve: return "evolve";
    case Command::sweep: return "sweep";
    case Command::contour: return "contour";
    case Command::omega_scan: return "omega-scan";
    case Command::parrondo: return "parrondo";
    case Command::reproduce: return "reproduce";
    case Command::verify: return "verify";
    }
    return "?";
}

inline Command parse_command(std::string_view s)
{
    for (auto c : {Command::evolve, Command::sweep, Command::contour, Command::omega_scan, Command::parrondo,
                   Command::reproduce, Command::verify})
        if (s == to_string(c)) return c;
    throw UsageError("unknown subcommand '" + std::string(s) + "'");
}

/// Every option of every subcommand, fully resolved.
struct RunConfig {
    Command command = Command::evolve;
    std::optional<DefectSpec> defect;
    std::optional<DefectSpec> a;
    std::optional<DefectSpec> b;
    bool localized = false;
    double sigma0 = 1.0;
    double gamma = 1.0;
    double epsilon = 0.0;
    double t_end = 1000.0;
    std::size_t samples = 101;
    Engine engine = Engine::chebyshev;
    double tolerance = 1e-13;
    std::optional<std::size_t> max_terms;
    int safety = 0;
    std::vector<SweepAxis> axes;
    PhaseMode phase = PhaseMode::opposite;
    std::optional<double> omega;
    double omega_min = 0.05;
    double omega_max = 20.0;
    std::size_t omega_count = 60;
    bool b_first = false;
    std::string out = "out";
    unsigned workers = default_worker_count();
    Scale scale = Scale::desk;
    std::string figure;
    std::string manifest;

    InitialState init() const { return localized ? InitialState::localized() : InitialState::gaussian(sigma0); }

    PropagatorConfig propagator() const { return {engine, tolerance, max_terms}; }

    ModelParams model() const { return {gamma, epsilon, safety}; }

    /// Protocol for the two strategies on the grid sized for t_end.
    ProtocolSpec protocol_spec() const
    {
        if (!a || !b) throw UsageError("protocol needs both --a and --b");
        const SiteGrid g = grid_for(t_end, init(), model());
        return {g, gamma, epsilon, *a, *b, omega.value_or(1.0), b_first};
    }
};

// ---------------------------------------------------------------------------
// Value parsers

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(std::string_view s, std::string_view what)
{
    try {
        const double v = io::parse_double(trim(s));
        if (!std::isfinite(v)) throw InvalidArgument("non-finite");
        return v;
    } catch (const InvalidArgument&) {
        throw UsageError("invalid number '" + std::string(s) + "' for " + std::string(what));
    }
}

/// Plain reals or multiples of pi: "0.5", "1.2pi", "-pi", "5pi/3".
inline double parse_angle(std::string_view raw, std::string_view what = "angle")
{
    const std::string s = trim(raw);
    const auto p = s.find("pi");
    if (p == std::string::npos) return parse_number(s, what);
    const std::string coef = s.substr(0, p);
    std::string rest = s.substr(p + 2);
    double x = 1.0;
    if (coef == "-") x = -1.0;
    else if (!coef.empty() && coef != "+") x = parse_number(coef, what);
    double v = x * std::numbers::pi;
    if (!rest.empty()) {
        if (rest.front() != '/') throw UsageError("invalid angle '" + s + "' for " + std::string(what));
        const double den = parse_number(rest.substr(1), what);
        if (den == 0.0) throw UsageError("zero denominator in angle '" + s + "'");
        v /= den;
    }
    return v;
}

inline std::size_t parse_count(std::string_view s, std::string_view what)
{
    const double v = parse_number(s, what);
    if (v < 0 || v != std::floor(v) || v > 1e9)
        throw UsageError("expected a nonnegative integer for " + std::string(what) + ", got '" + std::string(s) + "'");
    return static_cast<std::size_t>(v);
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto p = s.find(sep, start);
        parts.emplace_back(s.substr(start, p - start));
        if (p == std::string_view::npos) return parts;
        start = p + 1;
    }
}

/// Catalog name (A, B, C, D) or "xi=..,tm=..,tp=..[,site=..]".
inline DefectSpec parse_defect(std::string_view s)
{
    const std::string t = trim(s);
    if (StrategyCatalog::contains(t)) return StrategyCatalog::get(t);
    DefectSpec d{0, 1.0, 0.0, 0.0};
    for (const auto& item : split(t, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("invalid defect item '" + item + "' in '" + t + "'");
        const std::string key = trim(item.substr(0, eq)), val = item.substr(eq + 1);
        if (key == "xi") d.xi = parse_number(val, "xi");
        else if (key == "tm" || key == "theta_minus") d.theta_minus = parse_angle(val, key);
        else if (key == "tp" || key == "theta_plus") d.theta_plus = parse_angle(val, key);
        else if (key == "site" || key == "d") {
            const double v = parse_number(val, key);
            if (v != std::floor(v)) throw UsageError("defect site must be an integer");
            d.site = static_cast<int>(v);
        } else
            throw UsageError("unknown defect key '" + key + "' in '" + t + "'");
    }
    return d;
}

/// "name:min:max:steps", bounds accept the pi suffix.
inline SweepAxis parse_axis(std::string_view s)
{
    const auto parts = split(trim(s), ':');
    if (parts.size() != 4) throw UsageError("axis must be name:min:max:steps, got '" + std::string(s) + "'");
    SweepAxis a;
    try {
        a.param = parse_sweep_param(trim(parts[0]));
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    a.min = parse_angle(parts[1], "axis minimum");
    a.max = parse_angle(parts[2], "axis maximum");
    a.steps = parse_count(parts[3], "axis steps");
    if (a.steps < 2) throw UsageError("axis '" + std::string(s) + "' needs at least 2 steps");
    return a;
}

// ---------------------------------------------------------------------------
// Option table, shared by command-line flags and config-file keys

struct Option {
    std::string name;
    bool takes_value;
    bool repeatable;
    std::set<Command> commands;
    std::function<void(RunConfig&, const std::string&)> set;
    std::string help;
};

inline const std::vector<Option>& options()
{
    using C = Command;
    const std::set<C> runs{C::evolve, C::sweep, C::contour, C::omega_scan, C::parrondo};
    const std::set<C> numeric{C::evolve, C::sweep, C::contour, C::omega_scan, C::parrondo, C::reproduce};
    const std::set<C> pair{C::omega_scan, C::parrondo};
    static const std::vector<Option> table{
        {"defect", true, false, {C::evolve, C::sweep, C::contour},
         [](RunConfig& c, const std::string& v) { c.defect = parse_defect(v); },
         "defect as A|B|C|D or xi=..,tm=..,tp=.. (sweeps: fixed parameters)"},
        {"a", true, false, pair, [](RunConfig& c, const std::string& v) { c.a = parse_defect(v); }, "first strategy"},
        {"b", true, false, pair, [](RunConfig& c, const std::string& v) { c.b = parse_defect(v); }, "second strategy"},
        {"localized", false, false, runs, [](RunConfig& c, const std::string&) { c.localized = true; },
         "start from |0> instead of a Gaussian"},
        {"sigma0", true, false, runs,
         [](RunConfig& c, const std::string& v) {
             c.sigma0 = parse_number(v, "--sigma0");
             c.localized = false;
             if (!(c.sigma0 > 0)) throw UsageError("--sigma0 must be positive");
         },
         "Gaussian initial width in sites (default 1)"},
        {"gamma", true, false, numeric,
         [](RunConfig& c, const std::string& v) {
             c.gamma = parse_number(v, "--gamma");
             if (!(c.gamma > 0)) throw UsageError("--gamma must be positive");
         },
         "hopping amplitude (default 1)"},
        {"epsilon", true, false, numeric, [](RunConfig& c, const std::string& v) { c.epsilon = parse_number(v, "--epsilon"); },
         "on-site energy (default 0)"},
        {"t", true, false, runs,
         [](RunConfig& c, const std::string& v) {
             c.t_end = parse_number(v, "--t");
             if (!(c.t_end > 0)) throw UsageError("--t must be positive");
         },
         "final time gamma t (default 1000, omega-scan 500)"},
        {"samples", true, false, runs,
         [](RunConfig& c, const std::string& v) {
             c.samples = parse_count(v, "--samples");
             if (c.samples < 2) throw UsageError("--samples must be at least 2");
         },
         "number of sample times including 0 and t (default 101, sweeps 21)"},
        {"engine", true, false, numeric,
         [](RunConfig& c, const std::string& v) {
             if (v == "chebyshev") c.engine = Engine::chebyshev;
             else if (v == "reference") c.engine = Engine::reference;
             else throw UsageError("--engine must be chebyshev or reference, got '" + v + "'");
         },
         "chebyshev (default) or reference"},
        {"tolerance", true, false, numeric, [](RunConfig& c, const std::string& v) { c.tolerance = parse_number(v, "--tolerance"); },
         "Chebyshev truncation tolerance (default 1e-13)"},
        {"max-terms", true, false, numeric,
         [](RunConfig& c, const std::string& v) { c.max_terms = parse_count(v, "--max-terms"); },
         "hard cap on Chebyshev terms per step"},
        {"safety", true, false, numeric,
         [](RunConfig& c, const std::string& v) { c.safety = static_cast<int>(parse_count(v, "--safety")); },
         "extra lattice sites beyond the light cone"},
        {"axis", true, true, {C::sweep, C::contour},
         [](RunConfig& c, const std::string& v) { c.axes.push_back(parse_axis(v)); },
         "sweep axis name:min:max:steps, name in xi|theta|theta_minus|theta_plus|sigma0"},
        {"phase", true, false, {C::sweep, C::contour},
         [](RunConfig& c, const std::string& v) {
             if (v == "equal") c.phase = PhaseMode::equal;
             else if (v == "opposite") c.phase = PhaseMode::opposite;
             else throw UsageError("--phase must be equal or opposite, got '" + v + "'");
         },
         "how theta maps to the bond phases (default opposite)"},
        {"omega", true, false, {C::parrondo},
         [](RunConfig& c, const std::string& v) {
             c.omega = parse_number(v, "--omega");
             if (!(*c.omega > 0)) throw UsageError("--omega must be positive");
         },
         "alternation frequency (default: scan argmax)"},
        {"omegas", true, false, pair,
         [](RunConfig& c, const std::string& v) {
             const auto p = split(v, ':');
             if (p.size() != 3) throw UsageError("--omegas must be min:max:count");
             c.omega_min = parse_number(p[0], "--omegas");
             c.omega_max = parse_number(p[1], "--omegas");
             c.omega_count = parse_count(p[2], "--omegas");
             if (!(c.omega_min > 0 && c.omega_max > c.omega_min) || c.omega_count < 2)
                 throw UsageError("--omegas needs 0 < min < max and count >= 2");
         },
         "log-spaced omega scan min:max:count (default 0.05:20:60)"},
        {"b-first", false, false, pair, [](RunConfig& c, const std::string&) { c.b_first = true; },
         "start the alternation with the second strategy"},
        {"out", true, false, numeric, [](RunConfig& c, const std::string& v) { c.out = v; },
         "output directory (default out)"},
        {"workers", true, false, {C::sweep, C::contour, C::omega_scan, C::parrondo, C::reproduce},
         [](RunConfig& c, const std::string& v) {
             const auto n = parse_count(v, "--workers");
             if (n < 1) throw UsageError("--workers must be at least 1");
             c.workers = static_cast<unsigned>(n);
         },
         "parallel workers (default CTQW_WORKERS or hardware threads)"},
        {"scale", true, false, {C::reproduce},
         [](RunConfig& c, const std::string& v) {
             try {
                 c.scale = parse_scale(v);
             } catch (const InvalidArgument& e) {
                 throw UsageError(e.what());
             }
         },
         "full or desk (default desk)"},
        {"figure", true, false, {C::reproduce},
         [](RunConfig& c, const std::string& v) {
             if (std::find(figure_ids.begin(), figure_ids.end(), v) == figure_ids.end())
                 throw UsageError("unknown figure '" + v + "'");
             c.figure = v;
         },
         "fig2..fig8 or table1"},
        {"manifest", true, false, {C::verify}, [](RunConfig& c, const std::string& v) { c.manifest = v; },
         "manifest.json to check"},
    };
    return table;
}

inline const Option& find_option(std::string_view name)
{
    for (const auto& o : options())
        if (o.name == name) return o;
    throw UsageError("unknown option '--" + std::string(name) + "'");
}

inline void apply_defaults(RunConfig& c)
{
    switch (c.command) {
    case Command::sweep:
    case Command::contour: c.samples = 21; break;
    case Command::omega_scan:
        c.t_end = 500.0;
        c.samples = 21;
        break;
    default: break;
    }
}

/// Key/value pairs from one source in order of appearance.
struct Setting {
    std::string key;
    std::string value;
    bool from_file;
};

inline std::vector<Setting> settings_from_file(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a flat JSON object");
    std::vector<Setting> out;
    auto scalar = [](const std::string& key, const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number()) return io::format_double(v.get<double>());
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        throw UsageError("config key '" + key + "' must be a string, number or boolean");
    };
    for (const auto& [key, v] : j.items()) {
        const Option& o = find_option(key);
        if (v.is_array()) {
            if (!o.repeatable) throw UsageError("config key '" + key + "' does not take a list");
            for (const auto& e : v) out.push_back({key, scalar(key, e), true});
        } else if (!o.takes_value) {
            if (!v.is_boolean()) throw UsageError("config key '" + key + "' must be true or false");
            if (v.get<bool>()) out.push_back({key, "", true});
        } else {
            out.push_back({key, scalar(key, v), true});
        }
    }
    return out;
}

/// Parses "SUBCOMMAND [--flag [value]]...". Flags override the config file,
/// which overrides built-in defaults.
inline RunConfig parse_config(const std::vector<std::string>& args,
                              const std::optional<std::string>& config_text = std::nullopt)
{
    if (args.empty()) throw UsageError("missing subcommand");
    RunConfig c;
    c.command = parse_command(args[0]);
    apply_defaults(c);

    std::vector<Setting> flags;
    std::optional<std::string> config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& tok = args[i];
        if (tok.rfind("--", 0) != 0) {
            if (c.command == Command::verify && c.manifest.empty()) {
                flags.push_back({"manifest", tok, false});
                continue;
            }
            throw UsageError("unexpected argument '" + tok + "'");
        }
        std::string name = tok.substr(2), value;
        const auto eq = name.find('=');
        bool inline_value = false;
        if (eq != std::string::npos) {
            value = name.substr(eq + 1);
            name = name.substr(0, eq);
            inline_value = true;
        }
        if (name == "config") {
            if (!inline_value) {
                if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
                value = args[++i];
            }
            config_path = value;
            continue;
        }
        const Option& o = find_option(name);
        if (o.takes_value && !inline_value) {
            if (i + 1 >= args.size()) throw UsageError("option '--" + name + "' needs a value");
            value = args[++i];
        } else if (!o.takes_value && inline_value) {
            throw UsageError("option '--" + name + "' takes no value");
        }
        flags.push_back({name, value, false});
    }

    std::vector<Setting> all;
    if (config_text) {
        all = settings_from_file(*config_text);
    } else if (config_path) {
        try {
            all = settings_from_file(io::read_file(*config_path));
        } catch (const IoError& e) {
            throw UsageError(e.what());
        }
    }

    // A flag clears any file value of a repeatable key; initial-state flags
    // from the command line replace those from the file.
    std::set<std::string> flag_keys;
    for (const auto& f : flags) flag_keys.insert(f.key);
    const bool flag_init = flag_keys.count("localized") || flag_keys.count("sigma0");
    std::erase_if(all, [&](const Setting& s) {
        const Option& o = find_option(s.key);
        if (o.repeatable && flag_keys.count(s.key)) return true;
        if (flag_init && (s.key == "localized" || s.key == "sigma0")) return true;
        return false;
    });
    for (bool file_source : {true, false}) {
        bool has_localized = false, has_sigma0 = false;
        for (const auto& s : file_source ? all : flags) {
            has_localized = has_localized || s.key == "localized";
            has_sigma0 = has_sigma0 || s.key == "sigma0";
        }
        if (has_localized && has_sigma0)
            throw ConflictError("--localized and --sigma0 describe different initial states");
    }
    all.insert(all.end(), flags.begin(), flags.end());

    for (const auto& s : all) {
        const Option& o = find_option(s.key);
        if (!o.commands.count(c.command))
            throw ConflictError("option '--" + s.key + "' does not apply to '" + to_string(c.command) + "'");
        o.set(c, s.value);
        if (s.key == "localized") c.localized = true;
    }

    switch (c.command) {
    case Command::sweep:
        if (c.axes.size() != 1)
            throw ConflictError("sweep is one-dimensional: expected exactly one --axis, got " +
                                std::to_string(c.axes.size()));
        if (c.axes[0].param == SweepParam::omega) throw ConflictError("omega axes belong to omega-scan");
        break;
    case Command::contour:
        if (c.axes.empty()) {
            c.axes = {{SweepParam::xi, -2.5, 2.5, 41}, {SweepParam::theta, 0.0, 2 * std::numbers::pi, 41}};
        } else if (c.axes.size() != 2) {
            throw ConflictError("contour needs exactly two --axis options, got " + std::to_string(c.axes.size()));
        }
        for (const auto& a : c.axes)
            if (a.param == SweepParam::omega) throw ConflictError("omega axes belong to omega-scan");
        if (c.axes[0].param == c.axes[1].param) throw ConflictError("contour axes must differ");
        break;
    case Command::omega_scan:
    case Command::parrondo:
        if (!c.a || !c.b) throw UsageError(std::string(to_string(c.command)) + " requires --a and --b");
        if (c.a->site != c.b->site) throw UsageError("--a and --b must act on the same site");
        break;
    case Command::reproduce:
        if (c.figure.empty()) throw UsageError("reproduce requires --figure");
        break;
    case Command::verify:
        if (c.manifest.empty()) throw UsageError("verify requires a manifest path");
        break;
    case Command::evolve: break;
    }
    if (!(c.tolerance > 0.0 && c.tolerance <= 1e-6)) throw UsageError("--tolerance must lie in (0, 1e-6]");
    if (c.max_terms && *c.max_terms < 16) throw UsageError("--max-terms must be at least 16");
    return c;
}

inline json defect_json(const DefectSpec& d)
{
    return {{"site", d.site}, {"xi", d.xi}, {"theta_minus", d.theta_minus}, {"theta_plus", d.theta_plus}};
}

/// Resolved configuration as echoed into manifests (the output location is
/// not part of it).
inline json config_json(const RunConfig& c)
{
    json j = json::object();
    j["command"] = to_string(c.command);
    if (c.defect) j["defect"] = defect_json(*c.defect);
    if (c.a) j["a"] = defect_json(*c.a);
    if (c.b) j["b"] = defect_json(*c.b);
    j["initial_state"] = c.localized ? "localized" : "gaussian";
    if (!c.localized) j["sigma0"] = c.sigma0;
    j["gamma"] = c.gamma;
    j["epsilon"] = c.epsilon;
    j["t"] = c.t_end;
    j["samples"] = c.samples;
    j["engine"] = to_string(c.engine);
    j["tolerance"] = c.tolerance;
    if (c.max_terms) j["max_terms"] = *c.max_terms;
    j["safety"] = c.safety;
    if (!c.axes.empty()) {
        json axes = json::array();
        for (const auto& a : c.axes)
            axes.push_back({{"param", to_string(a.param)}, {"min", a.min}, {"max", a.max}, {"steps", a.steps}});
        j["axes"] = axes;
        j["phase"] = to_string(c.phase);
    }
    if (c.command == Command::omega_scan || c.command == Command::parrondo) {
        if (c.omega) j["omega"] = *c.omega;
        j["omegas"] = {{"min", c.omega_min}, {"max", c.omega_max}, {"count", c.omega_count}};
        j["b_first"] = c.b_first;
    }
    j["workers"] = c.workers;
    if (c.command == Command::reproduce) {
        j["figure"] = c.figure;
        j["scale"] = to_string(c.scale);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Execution

/// Short digest of the result-determining settings; the worker count is
/// excluded because results do not depend on it.
inline std::string config_digest(const RunConfig& c)
{
    json j = config_json(c);
    j.erase("workers");
    return "config " + io::sha256_hex(io::canonical_json(j)).substr(0, 12);
}

inline json series_stats(const TimeSeries& s)
{
    double leak = 0.0;
    for (double l : s.leakage) leak = std::max(leak, l);
    return {{"half_width", s.grid.half_width()},
            {"sites", s.grid.size()},
            {"chebyshev_terms_max", s.max_chebyshev_terms},
            {"leakage_max", leak},
            {"norm_drift_max", s.max_norm_drift}};
}

inline json sweep_stats(const SweepResult& r)
{
    std::size_t terms = 0;
    double leak = 0.0;
    for (const auto& rec : r.records) {
        terms = std::max(terms, rec.chebyshev_terms);
        leak = std::max(leak, rec.leakage_max);
    }
    return {{"half_width", r.half_width},
            {"sites", 2 * r.half_width + 1},
            {"chebyshev_terms_max", terms},
            {"leakage_max", leak},
            {"records", r.records.size()}};
}

struct Runner {
    Runner(const RunConfig& config, std::ostream& log_stream) : c(config), log(log_stream), out(config.out) {}

    const RunConfig& c;
    std::ostream& log;
    io::ArtifactSet out;
    io::RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish()
    {
        manifest.command = to_string(c.command);
        manifest.config = config_json(c);
        manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto p = out.finish(manifest);
        log << "wrote " << out.digests().size() << " files and " << p.string() << "\n";
    }

    Schedule schedule() const { return Schedule::linear(c.samples); }

    void evolve()
    {
        SampleOptions opt = default_sample_options(c.defect ? c.defect->site : 0);
        opt.keep_final_snapshot = true;
        const auto s = run_single(c.defect, c.init(), c.t_end, schedule(), c.propagator(), c.model(), opt);
        out.write("series.csv", io::series_table(s));
        out.write("distribution.csv",
                  io::distribution_table(s.grid, {"t" + io::format_double(c.t_end)}, {&s.snapshots.back().probability}));
        io::LineChart ch{"sigma(t)", config_digest(c), "gamma t", "sigma", {io::sigma_curve(s, "sigma")}, false};
        std::optional<TimeSeries> h;
        if (c.defect) {
            h = run_single(std::nullopt, c.init(), c.t_end, schedule(), c.propagator(), c.model());
            out.write("homogeneous.csv", io::series_table(*h));
            ch.curves.push_back(io::sigma_curve(*h, "H", true));
        }
        out.write("sigma.svg", io::render_line_chart(ch, ch.curves.size() == 1 ? io::PlotKind::line : io::PlotKind::multiline));
        manifest.derived = series_stats(s);
        manifest.derived["sigma_final"] = s.sigma.back();
        log << "sigma(" << io::format_double(c.t_end) << ") = " << io::format_double(s.sigma.back());
        if (const double a = detail::fitted_alpha(s); std::isfinite(a)) {
            manifest.derived["alpha"] = a;
            log << ", alpha = " << io::format_double(a);
        }
        log << "\n";
        if (h) {
            const double r = spreading_ratio(s, *h);
            manifest.derived["sigma_ratio"] = r;
            log << "sigma_d/sigma = " << io::format_double(r) << ", trapped = " << io::format_double(s.trapped.back())
                << "\n";
        }
    }

    SweepGrid grid() const
    {
        SweepGrid g;
        g.axes = c.axes;
        g.init = c.init();
        g.t_end = c.t_end;
        g.model = c.model();
        g.schedule = schedule();
        g.base = c.defect.value_or(DefectSpec{0, 1.0, 0.0, 0.0});
        return g;
    }

    void sweep()
    {
        const auto r = sweep_1d(grid(), c.phase, c.propagator(), c.workers);
        out.write("sweep.csv", io::sweep_table(r));
        out.write("sweep.svg", io::render_line_chart(io::sweep_chart(r, "sigma_d/sigma sweep", config_digest(c)),
                                                     io::PlotKind::line));
        manifest.derived = sweep_stats(r);
        const auto& best = r.records[r.argmax_ratio()];
        manifest.derived["best"] = {{"parameter", best.parameters[0]}, {"ratio", best.sigma_ratio}};
        log << "max sigma_d/sigma = " << io::format_double(best.sigma_ratio) << " at "
            << to_string(c.axes[0].param) << " = " << io::format_double(best.parameters[0]) << "\n";
    }

    void contour()
    {
        const auto r = contour_map(grid(), c.phase, c.propagator(), c.workers);
        out.write("contour.csv", io::sweep_table(r));
        out.write("contour.svg", io::render_heatmap(io::sweep_heatmap(r, "sigma_d/sigma map", config_digest(c))));
        manifest.derived = sweep_stats(r);
        log << r.records.size() << " grid points\n";
    }

    OmegaScan scan() const
    {
        return omega_scan(*c.a, *c.b, log_spaced(c.omega_min, c.omega_max, c.omega_count), c.init(), c.t_end,
                          schedule(), c.propagator(), c.model(), c.workers, c.b_first);
    }

    void omega_scan_cmd()
    {
        const auto s = scan();
        out.write("omega_scan.csv", io::sweep_table(s.result));
        out.write("omega_scan.svg", io::render_line_chart(io::sweep_chart(s.result, "sigma_d/sigma versus omega",
                                                                          config_digest(c)),
                                                           io::PlotKind::line));
        manifest.derived = sweep_stats(s.result);
        manifest.derived["best_omega"] = s.best_omega;
        manifest.derived["best_ratio"] = s.best_ratio;
        log << "best omega = " << io::format_double(s.best_omega) << ", ratio = " << io::format_double(s.best_ratio)
            << "\n";
    }

    void parrondo()
    {
        json derived = json::object();
        double omega = 0.0;
        if (c.omega) {
            omega = *c.omega;
        } else {
            const auto s = scan();
            omega = s.best_omega;
            derived["scan_best_ratio"] = s.best_ratio;
        }
        SampleOptions opt = default_sample_options(c.a->site);
        opt.keep_final_snapshot = true;
        const auto init = c.init();
        const auto sched = schedule();
        TimeSeries sa, sb, sab, sh;
        TimeSeries* slots[4] = {&sa, &sb, &sab, &sh};
        parallel_for(4, c.workers, [&](std::size_t i) {
            if (i == 0) *slots[i] = run_single(*c.a, init, c.t_end, sched, c.propagator(), c.model(), opt);
            else if (i == 1) *slots[i] = run_single(*c.b, init, c.t_end, sched, c.propagator(), c.model(), opt);
            else if (i == 2)
                *slots[i] = run_protocol(*c.a, *c.b, omega, init, c.t_end, sched, c.propagator(), c.model(), opt,
                                         c.b_first);
            else *slots[i] = run_single(std::nullopt, init, c.t_end, sched, c.propagator(), c.model(), opt);
        });
        io::Table t;
        t.header = {"t[1/gamma]", "sigma_A[sites]", "sigma_B[sites]", "sigma_AB[sites]", "sigma_H[sites]",
                    "trapped_AB[-]"};
        for (std::size_t i = 0; i < sh.size(); ++i)
            t.add_row({sh.times[i], sa.sigma[i], sb.sigma[i], sab.sigma[i], sh.sigma[i], sab.trapped[i]});
        out.write("parrondo_sigma.csv", t);
        out.write("parrondo_dist.csv",
                  io::distribution_table(sh.grid, {"A", "B", "AB", "H"},
                                         {&sa.snapshots.back().probability, &sb.snapshots.back().probability,
                                          &sab.snapshots.back().probability, &sh.snapshots.back().probability}));
        io::LineChart ch{"sigma(t), omega = " + io::format_double(omega), config_digest(c), "gamma t", "sigma",
                         {io::sigma_curve(sa, "A"), io::sigma_curve(sb, "B"), io::sigma_curve(sab, "AB"),
                          io::sigma_curve(sh, "H", true)},
                         false};
        out.write("parrondo_sigma.svg", io::render_line_chart(ch));
        derived.update(series_stats(sab));
        derived["omega"] = omega;
        derived["sigma_final"] = {{"A", sa.sigma.back()}, {"B", sb.sigma.back()}, {"AB", sab.sigma.back()},
                                  {"H", sh.sigma.back()}};
        derived["trapped_final"] = {{"A", sa.trapped.back()}, {"B", sb.trapped.back()}, {"AB", sab.trapped.back()}};
        manifest.derived = derived;
        log << "omega = " << io::format_double(omega) << ": sigma A " << io::format_double(sa.sigma.back()) << ", B "
            << io::format_double(sb.sigma.back()) << ", AB " << io::format_double(sab.sigma.back()) << ", H "
            << io::format_double(sh.sigma.back()) << "\n";
    }
};

/// Runs a parsed configuration; returns the process exit code.
inline int run(const RunConfig& c, std::ostream& log)
{
    if (c.command == Command::verify) {
        const auto r = io::verify_manifest(c.manifest);
        for (const auto& m : r.missing) log << "missing: " << m << "\n";
        for (const auto& m : r.mismatched) log << "digest mismatch: " << m << "\n";
        log << (r.ok() ? "ok" : "FAILED") << ": " << r.checked << " files checked\n";
        return r.ok() ? 0 : 4;
    }
    if (c.command == Command::reproduce) {
        ReproduceOptions o;
        o.scale = c.scale;
        o.cfg = c.propagator();
        o.model = c.model();
        o.workers = c.workers;
        o.out_dir = c.out;
        const auto r = reproduce(c.figure, o);
        log << r.summary.dump(2) << "\nwrote " << r.manifest.string() << "\n";
        return 0;
    }
    Runner r{c, log};
    switch (c.command) {
    case Command::evolve: r.evolve(); break;
    case Command::sweep: r.sweep(); break;
    case Command::contour: r.contour(); break;
    case Command::omega_scan: r.omega_scan_cmd(); break;
    case Command::parrondo: r.parrondo(); break;
    default: break;
    }
    r.finish();
    return 0;
}

inline std::string usage()
{
    std::string u =
        "usage: ctqw SUBCOMMAND [options]\n"
        "subcommands: evolve, sweep, contour, omega-scan, parrondo, reproduce, verify\n"
        "angles accept multiples of pi, e.g. 1.2pi or 5pi/3\n\n"
        "  --config FILE  flat JSON object whose keys are option names\n";
    for (const auto& o : options()) {
        std::string flag = "  --" + o.name + (o.takes_value ? " V" : "");
        flag.resize(std::max<std::size_t>(flag.size() + 1, 17), ' ');
        u += flag + o.help + "\n";
    }
    u += "\nexit codes: 0 ok, 2 usage, 3 numeric failure, 4 verification failure, 1 other\n";
    return u;
}

/// Full command-line entry point with exit-code mapping.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        (args.empty() ? err : out) << usage();
        return args.empty() ? 2 : 0;
    }
    try {
        return run(parse_config(args), out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ctqw::cli

#endif  // CTQW_CLI_HPP
