#ifndef CTQW_REPRODUCE_HPP
#define CTQW_REPRODUCE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ctqw/analytics.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/io/csv.hpp"
#include "ctqw/io/manifest.hpp"
#include "ctqw/io/svg.hpp"

namespace ctqw {

enum class Scale { full, desk };

inline const char* to_string(Scale s) { return s == Scale::full ? "full" : "desk"; }

inline Scale parse_scale(std::string_view s)
{
    if (s == "full") return Scale::full;
    if (s == "desk") return Scale::desk;
    throw InvalidArgument("unknown scale '" + std::string(s) + "' (expected full or desk)");
}

inline constexpr std::array<std::string_view, 8> figure_ids{"fig2", "fig3", "fig4", "fig5",
                                                            "fig6", "fig7", "fig8", "table1"};

struct ReproduceOptions {
    Scale scale = Scale::desk;
    PropagatorConfig cfg;
    ModelParams model;
    unsigned workers = default_worker_count();
    std::filesystem::path out_dir = "out";
    /// Extra configuration echoed into the manifest.
    io::json config = io::json::object();
};

struct ReproduceResult {
    std::filesystem::path manifest;
    io::json summary = io::json::object();
};

namespace repro {

inline constexpr double pi = std::numbers::pi;

struct Plan {
    double t_end;
    std::size_t points;
    std::size_t contour_points;
    std::size_t omegas;
    double scan_t;
    Schedule schedule;
};

inline Plan plan(Scale s)
{
    if (s == Scale::full) return {1000.0, 101, 81, 60, 500.0, Schedule::linear(21)};
    return {200.0, 41, 41, 30, 200.0, Schedule::linear(21)};
}

inline std::vector<InitialState> figure_inits()
{
    return {InitialState::localized(), InitialState::gaussian(1.0), InitialState::gaussian(5.0),
            InitialState::gaussian(10.0)};
}

inline std::string init_tag(const InitialState& s)
{
    if (s.is_localized()) return "localized";
    return "sigma0_" + io::format_double(s.sigma0);
}

struct Stats {
    int half_width = 0;
    std::size_t chebyshev_terms = 0;
    double leakage_max = 0.0;

    void add(const TimeSeries& s)
    {
        half_width = std::max(half_width, s.grid.half_width());
        chebyshev_terms = std::max(chebyshev_terms, s.max_chebyshev_terms);
        for (double l : s.leakage) leakage_max = std::max(leakage_max, l);
    }

    void add(const SweepResult& r)
    {
        half_width = std::max(half_width, r.half_width);
        for (const auto& rec : r.records) {
            chebyshev_terms = std::max(chebyshev_terms, rec.chebyshev_terms);
            leakage_max = std::max(leakage_max, rec.leakage_max);
        }
    }

    io::json to_json() const
    {
        return {{"half_width", half_width},
                {"sites", 2 * half_width + 1},
                {"chebyshev_terms_max", chebyshev_terms},
                {"leakage_max", leakage_max}};
    }
};

struct Context {
    const ReproduceOptions& opt;
    Plan p;
    io::ArtifactSet& out;
    std::string digest;
    Stats stats;
    io::json summary = io::json::object();
};

inline SweepGrid base_grid(const Context& c, const InitialState& init, SweepAxis axis, DefectSpec base)
{
    SweepGrid g;
    g.axes = {axis};
    g.init = init;
    g.t_end = c.p.t_end;
    g.model = c.opt.model;
    g.schedule = c.p.schedule;
    g.base = base;
    return g;
}

inline void fig2(Context& c)
{
    const std::vector<double> widths{0.25, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<TimeSeries> runs(widths.size());
    parallel_for(widths.size(), c.opt.workers, [&](std::size_t i) {
        runs[i] = run_single(std::nullopt, InitialState::gaussian(widths[i]), c.p.t_end, Schedule::linear(101),
                             c.opt.cfg, c.opt.model);
    });
    io::Table t;
    t.header = {"sigma0[sites]", "alpha[gamma]", "alpha_c[gamma]", "alpha_a[gamma]"};
    io::Curve sim{"simulation", {}, {}}, corr{"alpha_c", {}, {}}, asym{"alpha_a", {}, {}, true};
    double worst = 0.0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        c.stats.add(runs[i]);
        const analytics::ContinuumParams cp{widths[i], c.opt.model.gamma};
        const double a = spreading_rate(runs[i]).alpha;
        const double ac = analytics::alpha_corrected(cp), aa = analytics::alpha_asymptotic(cp);
        t.add_row({widths[i], a, ac, aa});
        for (auto* cv : {&sim, &corr, &asym}) cv->x.push_back(widths[i]);
        sim.y.push_back(a);
        corr.y.push_back(ac);
        asym.y.push_back(std::min(aa, 3.0));
        worst = std::max(worst, std::abs(a / ac - 1.0));
    }
    c.out.write("fig2.csv", t);
    io::LineChart ch{"Spreading rate versus initial width", c.digest, "sigma0", "alpha", {sim, corr, asym}, true};
    c.out.write("fig2.svg", io::render_line_chart(ch));
    c.summary["alpha_c_max_relative_deviation"] = worst;
}

/// Phase defaults for the xi panels: theta = pi/2 in the requested mode.
inline DefectSpec xi_panel_base(PhaseMode m) { return {0, 1.0, pi / 2, m == PhaseMode::equal ? pi / 2 : -pi / 2}; }

inline void xi_or_theta_panels(Context& c, const std::string& stem, SweepAxis axis, PhaseMode mode,
                               double SweepRecord::*field, const std::string& column, const std::string& y_label,
                               const std::string& title)
{
    const auto inits = figure_inits();
    io::Table t;
    t.header.push_back(std::string(to_string(axis.param)) + io::axis_unit(axis.param));
    io::LineChart ch{title, c.digest, to_string(axis.param), y_label, {}, false};
    std::vector<SweepResult> res;
    for (const auto& init : inits) {
        const DefectSpec base = axis.param == SweepParam::xi ? xi_panel_base(mode) : DefectSpec{0, 1.0, 0.0, 0.0};
        res.push_back(sweep_1d(base_grid(c, init, axis, base), mode, c.opt.cfg, c.opt.workers));
        c.stats.add(res.back());
        t.header.push_back(column + "_" + init_tag(init) + "[-]");
        io::Curve cv{init_tag(init), {}, {}};
        for (const auto& r : res.back().records) {
            cv.x.push_back(r.parameters[0]);
            cv.y.push_back(r.*field);
        }
        ch.curves.push_back(std::move(cv));
    }
    for (std::size_t i = 0; i < axis.steps; ++i) {
        std::vector<double> row{axis.value(i)};
        for (const auto& r : res) row.push_back(r.records[i].*field);
        t.add_row(row);
    }
    c.out.write(stem + ".csv", t);
    c.out.write(stem + ".svg", io::render_line_chart(ch));
    io::json pj = io::json::object();
    for (std::size_t k = 0; k < inits.size(); ++k) {
        const auto col = t.numeric_column(k + 1);
        pj[init_tag(inits[k])] = {{"min", *std::min_element(col.begin(), col.end())},
                                  {"max", *std::max_element(col.begin(), col.end())}};
    }
    c.summary[stem] = pj;
}

inline void fig3(Context& c)
{
    const SweepAxis ax{SweepParam::xi, -2.5, 2.5, c.p.points};
    xi_or_theta_panels(c, "fig3a_equal", ax, PhaseMode::equal, &SweepRecord::p_defect, "p0", "P0",
                       "P0 versus xi, equal phases");
    xi_or_theta_panels(c, "fig3b_opposite", ax, PhaseMode::opposite, &SweepRecord::p_defect, "p0", "P0",
                       "P0 versus xi, opposite phases");
}

inline void fig4(Context& c)
{
    const auto inits = figure_inits();
    const SweepAxis ax{SweepParam::theta, -2 * pi, 2 * pi, c.p.points};
    const std::vector<double> centers{c.p.t_end / 4, c.p.t_end / 2, c.p.t_end};
    const std::size_t n = ax.steps * inits.size();
    std::vector<std::vector<double>> avg(n);
    parallel_for(n, c.opt.workers, [&](std::size_t i) {
        const double th = ax.value(i / inits.size());
        avg[i] = averaged_p_defect({0, 1.0, th, th}, inits[i % inits.size()], centers, 10.0, 101, c.opt.cfg,
                                   c.opt.model);
    });
    io::Table t;
    t.header.push_back("theta[rad]");
    for (const auto& init : inits)
        for (double tc : centers) t.header.push_back("tP0_" + init_tag(init) + "_t" + io::format_double(tc) + "[-]");
    io::LineChart ch{"Rescaled gamma t P0 versus theta (xi = 1, equal phases)", c.digest, "theta", "gamma t P0", {},
                     false};
    for (const auto& init : inits) ch.curves.push_back({init_tag(init), {}, {}});
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 0; k < ax.steps; ++k) {
        std::vector<double> row{ax.value(k)};
        for (std::size_t s = 0; s < inits.size(); ++s) {
            const auto& a = avg[k * inits.size() + s];
            for (std::size_t m = 0; m < centers.size(); ++m) {
                row.push_back(centers[m] * a[m]);
                const double ratio = (centers[m] * a[m]) / (centers.back() * a.back());
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            ch.curves[s].x.push_back(ax.value(k));
            ch.curves[s].y.push_back(centers.back() * a.back());
        }
        t.add_row(row);
    }
    c.out.write("fig4.csv", t);
    c.out.write("fig4.svg", io::render_line_chart(ch));
    c.summary["collapse_ratio_min"] = lo;
    c.summary["collapse_ratio_max"] = hi;
    c.stats.half_width = std::max(c.stats.half_width, grid_for(c.p.t_end + 10.0, inits.back(), c.opt.model).half_width());
}

inline void fig5(Context& c)
{
    const SweepAxis xi{SweepParam::xi, -2.5, 2.5, c.p.points};
    const SweepAxis th{SweepParam::theta, -2 * pi, 2 * pi, c.p.points};
    const auto f = &SweepRecord::sigma_ratio;
    xi_or_theta_panels(c, "fig5a_xi_equal", xi, PhaseMode::equal, f, "ratio", "sigma_d/sigma",
                       "sigma_d/sigma versus xi, equal phases");
    xi_or_theta_panels(c, "fig5b_xi_opposite", xi, PhaseMode::opposite, f, "ratio", "sigma_d/sigma",
                       "sigma_d/sigma versus xi, opposite phases");
    xi_or_theta_panels(c, "fig5c_theta_equal", th, PhaseMode::equal, f, "ratio", "sigma_d/sigma",
                       "sigma_d/sigma versus theta, xi = 1, equal phases");
    xi_or_theta_panels(c, "fig5d_theta_opposite", th, PhaseMode::opposite, f, "ratio", "sigma_d/sigma",
                       "sigma_d/sigma versus theta, xi = 1, opposite phases");
}

inline void fig6(Context& c)
{
    SweepGrid g = base_grid(c, InitialState::gaussian(1.0), {SweepParam::xi, -2.5, 2.5, c.p.contour_points},
                            {0, 1.0, 0.0, 0.0});
    g.axes.push_back({SweepParam::theta, 0.0, 2 * pi, c.p.contour_points});
    const auto r = contour_map(g, PhaseMode::opposite, c.opt.cfg, c.opt.workers);
    c.stats.add(r);
    c.out.write("fig6.csv", io::sweep_table(r));
    c.out.write("fig6.svg", io::render_heatmap(io::sweep_heatmap(r, "sigma_d/sigma over (xi, theta), opposite phases",
                                                                  c.digest)));
    const auto ratios = r.column(&SweepRecord::sigma_ratio);
    c.summary["ratio_min"] = *std::min_element(ratios.begin(), ratios.end());
    c.summary["ratio_max"] = *std::max_element(ratios.begin(), ratios.end());
}

inline const std::array<std::array<const char*, 2>, 3>& pairs()
{
    static const std::array<std::array<const char*, 2>, 3> p{{{"A", "B"}, {"C", "B"}, {"C", "D"}}};
    return p;
}

inline OmegaScan scan_pair(Context& c, const std::array<const char*, 2>& pr, double t_end)
{
    auto s = omega_scan(StrategyCatalog::get(pr[0]), StrategyCatalog::get(pr[1]),
                        log_spaced(0.05, 20.0, c.p.omegas), InitialState::gaussian(1.0), t_end, c.p.schedule,
                        c.opt.cfg, c.opt.model, c.opt.workers);
    c.stats.add(s.result);
    return s;
}

inline void fig7(Context& c)
{
    const double t_end = c.opt.scale == Scale::full ? 2000.0 : c.p.t_end;
    io::LineChart ch{"sigma_d/sigma versus omega", c.digest, "omega", "sigma_d/sigma", {}, true};
    io::json best = io::json::object();
    for (const auto& pr : pairs()) {
        const std::string name = std::string(pr[0]) + pr[1];
        const auto s = scan_pair(c, pr, t_end);
        c.out.write("fig7_" + name + ".csv", io::sweep_table(s.result));
        ch.curves.push_back({name, s.omegas, s.result.column(&SweepRecord::sigma_ratio)});
        best[name] = {{"omega", s.best_omega}, {"ratio", s.best_ratio}};
    }
    c.out.write("fig7.svg", io::render_line_chart(ch));
    c.summary["best_omega"] = best;
}

inline void fig8(Context& c)
{
    io::json res = io::json::object();
    for (const auto& pr : pairs()) {
        const std::string name = std::string(pr[0]) + pr[1];
        const auto scan = scan_pair(c, pr, c.p.scan_t);
        const auto cmp = parrondo_compare(pr[0], pr[1], scan.best_omega, InitialState::gaussian(1.0), c.p.t_end,
                                          Schedule::linear(101), c.opt.cfg, c.opt.model, c.opt.workers);
        for (const auto* s : {&cmp.series_a, &cmp.series_b, &cmp.series_ab, &cmp.series_h}) c.stats.add(*s);
        io::Table sig;
        sig.header = {"t[1/gamma]", std::string("sigma_") + pr[0] + "[sites]", std::string("sigma_") + pr[1] + "[sites]",
                      "sigma_" + name + "[sites]", "sigma_H[sites]"};
        for (std::size_t i = 0; i < cmp.series_h.size(); ++i)
            sig.add_row({cmp.series_h.times[i], cmp.series_a.sigma[i], cmp.series_b.sigma[i], cmp.series_ab.sigma[i],
                         cmp.series_h.sigma[i]});
        c.out.write("fig8_sigma_" + name + ".csv", sig);
        c.out.write("fig8_dist_" + name + ".csv",
                    io::distribution_table(cmp.series_h.grid, {pr[0], pr[1], name, "H"},
                                           {&cmp.series_a.snapshots.back().probability,
                                            &cmp.series_b.snapshots.back().probability,
                                            &cmp.series_ab.snapshots.back().probability,
                                            &cmp.series_h.snapshots.back().probability}));
        io::LineChart ch{"sigma(t) for " + name + " at omega = " + io::format_double(scan.best_omega), c.digest,
                         "gamma t", "sigma",
                         {io::sigma_curve(cmp.series_a, pr[0]), io::sigma_curve(cmp.series_b, pr[1]),
                          io::sigma_curve(cmp.series_ab, name), io::sigma_curve(cmp.series_h, "H", true)},
                         false};
        c.out.write("fig8_sigma_" + name + ".svg", io::render_line_chart(ch));
        io::LineChart dist{"P(j) at gamma t = " + io::format_double(c.p.t_end) + " for " + name, c.digest, "j", "P(j)",
                           {}, false};
        const auto& g = cmp.series_h.grid;
        std::vector<double> js(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) js[i] = g.site(i);
        const std::array<std::pair<std::string, const TimeSeries*>, 4> ds{
            {{pr[0], &cmp.series_a}, {pr[1], &cmp.series_b}, {name, &cmp.series_ab}, {"H", &cmp.series_h}}};
        for (const auto& [label, s] : ds) dist.curves.push_back({label, js, s->snapshots.back().probability, label == "H"});
        c.out.write("fig8_dist_" + name + ".svg", io::render_line_chart(dist));
        res[name] = {{"omega", scan.best_omega},
                     {"sigma_a", cmp.series_a.sigma.back()},
                     {"sigma_b", cmp.series_b.sigma.back()},
                     {"sigma_ab", cmp.series_ab.sigma.back()},
                     {"sigma_h", cmp.series_h.sigma.back()},
                     {"trapped_a", cmp.series_a.trapped.back()},
                     {"trapped_b", cmp.series_b.trapped.back()},
                     {"trapped_ab", cmp.series_ab.trapped.back()}};
    }
    c.summary["pairs"] = res;
}

inline void table1(Context& c)
{
    const auto init = InitialState::gaussian(1.0);
    const auto& cat = StrategyCatalog::all();
    std::vector<TimeSeries> runs(cat.size() + 1);
    parallel_for(runs.size(), c.opt.workers, [&](std::size_t i) {
        runs[i] = i < cat.size() ? run_single(cat[i].spec, init, c.p.t_end, c.p.schedule, c.opt.cfg, c.opt.model)
                                 : run_single(std::nullopt, init, c.p.t_end, c.p.schedule, c.opt.cfg, c.opt.model);
    });
    io::Table t;
    t.header = {"strategy[-]", "xi[-]",      "theta_minus[rad]", "theta_plus[rad]",
                "ratio[-]",    "trapped[-]", "mean[sites]"};
    io::json ratios = io::json::object();
    for (std::size_t i = 0; i < cat.size(); ++i) {
        c.stats.add(runs[i]);
        const double r = spreading_ratio(runs[i], runs.back());
        const auto& d = cat[i].spec;
        t.add_row({std::string(cat[i].name), io::format_double(d.xi), io::format_double(d.theta_minus),
                   io::format_double(d.theta_plus), io::format_double(r), io::format_double(runs[i].trapped.back()),
                   io::format_double(runs[i].mean_pos.back())});
        ratios[std::string(cat[i].name)] = {{"ratio", r}, {"trapped", runs[i].trapped.back()}};
    }
    c.stats.add(runs.back());
    c.out.write("table1.csv", t);
    c.summary["strategies"] = ratios;
}

}  // namespace repro

/// Runs one named figure campaign and writes its tables, plots and manifest.
inline ReproduceResult reproduce(std::string_view id, const ReproduceOptions& opt)
{
    if (std::find(figure_ids.begin(), figure_ids.end(), id) == figure_ids.end())
        throw InvalidArgument("unknown figure id '" + std::string(id) + "'");
    opt.cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    io::json config = opt.config;
    config["figure"] = std::string(id);
    config["scale"] = to_string(opt.scale);
    config["engine"] = to_string(opt.cfg.engine);
    config["tolerance"] = opt.cfg.tolerance;
    config["gamma"] = opt.model.gamma;
    config["epsilon"] = opt.model.epsilon;
    config["safety"] = opt.model.safety;

    io::ArtifactSet out(opt.out_dir);
    repro::Context c{opt, repro::plan(opt.scale), out, "config " + io::sha256_hex(io::canonical_json(config)).substr(0, 12),
                     {}, io::json::object()};
    if (id == "fig2") repro::fig2(c);
    else if (id == "fig3") repro::fig3(c);
    else if (id == "fig4") repro::fig4(c);
    else if (id == "fig5") repro::fig5(c);
    else if (id == "fig6") repro::fig6(c);
    else if (id == "fig7") repro::fig7(c);
    else if (id == "fig8") repro::fig8(c);
    else repro::table1(c);

    io::RunManifest m;
    m.command = "reproduce";
    m.config = config;
    m.derived = c.stats.to_json();
    m.derived["results"] = c.summary;
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ReproduceResult r;
    r.manifest = out.finish(m);
    r.summary = c.summary;
    return r;
}

}  // namespace ctqw

#endif  // CTQW_REPRODUCE_HPP
