#ifndef CTQW_EXPERIMENTS_HPP
#define CTQW_EXPERIMENTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/model.hpp"
#include "ctqw/observables.hpp"
#include "ctqw/parallel.hpp"
#include "ctqw/propagator.hpp"
#include "ctqw/states.hpp"

namespace ctqw {

// ---------------------------------------------------------------------------
// Strategy catalog

struct NamedStrategy {
    std::string_view name;
    DefectSpec spec;
};

namespace detail {
inline constexpr double pi = std::numbers::pi;
inline constexpr std::array<NamedStrategy, 4> catalog{{
    {"A", {0, -1.8, -1.2 * pi, 1.2 * pi}},
    {"B", {0, 1.4, -1.5 * pi, 1.5 * pi}},
    {"C", {0, -1.0, 1.1 * pi, 1.1 * pi}},
    {"D", {0, -1.0, 0.9 * pi, 0.9 * pi}},
}};
}  // namespace detail

/// The four losing strategies, all acting on site 0.
struct StrategyCatalog {
    static const std::array<NamedStrategy, 4>& all() noexcept { return detail::catalog; }

    static bool contains(std::string_view name) noexcept
    {
        return std::any_of(all().begin(), all().end(), [&](const auto& s) { return s.name == name; });
    }

    static const DefectSpec& get(std::string_view name)
    {
        for (const auto& s : all())
            if (s.name == name) return s.spec;
        throw InvalidArgument("unknown strategy '" + std::string(name) + "' (expected A, B, C or D)");
    }
};

// ---------------------------------------------------------------------------
// Run description

/// Initial wave packet centred on site 0.
struct InitialState {
    enum class Kind { localized, gaussian };
    Kind kind = Kind::gaussian;
    double sigma0 = 1.0;

    static InitialState localized() { return {Kind::localized, 0.0}; }
    static InitialState gaussian(double s0) { return {Kind::gaussian, s0}; }

    bool is_localized() const noexcept { return kind == Kind::localized; }
    /// Width used for lattice sizing.
    double extent() const noexcept { return is_localized() ? 0.0 : sigma0; }

    WaveState make(const SiteGrid& grid) const
    {
        return is_localized() ? localized_state(grid, 0) : gaussian_state(grid, sigma0);
    }

    std::string label() const
    {
        return is_localized() ? std::string("localized") : "gaussian(sigma0=" + std::to_string(sigma0) + ")";
    }
};

/// Lattice-wide constants shared by every run of a campaign.
struct ModelParams {
    double gamma = 1.0;
    double epsilon = 0.0;
    /// Extra sites added on top of required_half_width.
    int safety = 0;
};

/// Sample times in [0, t_end]; the last sample is always t_end.
struct Schedule {
    enum class Spacing { linear, log };
    std::size_t count = 101;
    Spacing spacing = Spacing::linear;
    /// First sample for log spacing.
    double log_start = 1.0;

    static Schedule linear(std::size_t n) { return {n, Spacing::linear, 1.0}; }
    static Schedule log(std::size_t n, double start) { return {n, Spacing::log, start}; }

    std::vector<double> times(double t_end) const
    {
        if (count < 2) throw InvalidArgument("Schedule: at least two samples required");
        if (!(t_end > 0.0)) throw InvalidArgument("Schedule: t_end must be positive");
        std::vector<double> t(count);
        if (spacing == Spacing::linear) {
            for (std::size_t k = 0; k < count; ++k)
                t[k] = t_end * static_cast<double>(k) / static_cast<double>(count - 1);
        } else {
            if (!(log_start > 0.0 && log_start < t_end))
                throw InvalidArgument("Schedule: log spacing needs 0 < start < t_end");
            const double l0 = std::log(log_start), l1 = std::log(t_end);
            for (std::size_t k = 0; k < count; ++k)
                t[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(count - 1));
        }
        t.back() = t_end;
        return t;
    }
};

/// M = ceil(2 gamma t_end) + max(64, ceil(8 sigma0)) + safety.
inline int required_half_width(double t_end, double gamma, double sigma0, int safety = 0)
{
    const double cone = std::ceil(2.0 * gamma * t_end);
    const double tail = std::max(64.0, std::ceil(8.0 * sigma0));
    return static_cast<int>(cone + tail) + safety;
}

inline SiteGrid grid_for(double t_end, const InitialState& init, const ModelParams& model)
{
    return SiteGrid(required_half_width(t_end, model.gamma, init.extent(), model.safety));
}

inline SampleOptions default_sample_options(int defect_site = 0)
{
    SampleOptions o;
    o.defect_site = defect_site;
    return o;
}

/// One static evolution (homogeneous when defect is empty).
inline TimeSeries run_single(const std::optional<DefectSpec>& defect, const InitialState& init,
                             double t_end, const Schedule& schedule, const PropagatorConfig& cfg = {},
                             const ModelParams& model = {}, SampleOptions opt = default_sample_options())
{
    const SiteGrid grid = grid_for(t_end, init, model);
    const Hamiltonian h = defect ? build_defective(grid, model.gamma, model.epsilon, *defect)
                                 : build_homogeneous(grid, model.gamma, model.epsilon);
    if (defect) opt.defect_site = defect->site;
    return sample_series(h, init.make(grid), schedule.times(t_end), cfg, opt);
}

/// Alternation of two strategies with half-cycle pi/omega.
inline TimeSeries run_protocol(const DefectSpec& a, const DefectSpec& b, double omega,
                               const InitialState& init, double t_end, const Schedule& schedule,
                               const PropagatorConfig& cfg = {}, const ModelParams& model = {},
                               SampleOptions opt = default_sample_options(), bool b_first = false)
{
    const SiteGrid grid = grid_for(t_end, init, model);
    const ProtocolSpec p{grid, model.gamma, model.epsilon, a, b, omega, b_first};
    p.validate();
    opt.defect_site = a.site;
    return sample_series(p, init.make(grid), schedule.times(t_end), cfg, opt);
}

/// n logarithmically spaced values in [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0 && hi > lo) || n < 2) throw InvalidArgument("log_spaced: need 0 < lo < hi and n >= 2");
    std::vector<double> v(n);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

/// Uniform time average of P at the defect over [c - half_window, c + half_window]
/// for each centre c, from a single evolution. P at the defect oscillates at the
/// band-edge frequency (period about pi/(2 gamma)), so instantaneous values are
/// a poor estimate of its envelope.
inline std::vector<double> averaged_p_defect(const DefectSpec& defect, const InitialState& init,
                                             const std::vector<double>& centers, double half_window = 10.0,
                                             std::size_t samples_per_window = 201, const PropagatorConfig& cfg = {},
                                             const ModelParams& model = {})
{
    if (centers.empty()) throw InvalidArgument("averaged_p_defect: no centres");
    if (!(half_window > 0.0) || samples_per_window < 2)
        throw InvalidArgument("averaged_p_defect: need a positive window and at least 2 samples");
    std::vector<double> times;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (centers[i] < half_window || (i > 0 && centers[i] - centers[i - 1] < 2.0 * half_window))
            throw InvalidArgument("averaged_p_defect: windows must be ordered, disjoint and start at t >= 0");
        for (std::size_t k = 0; k < samples_per_window; ++k)
            times.push_back(centers[i] - half_window +
                            2.0 * half_window * static_cast<double>(k) / static_cast<double>(samples_per_window - 1));
    }
    const SiteGrid grid = grid_for(centers.back() + half_window, init, model);
    const auto s = sample_series(build_defective(grid, model.gamma, model.epsilon, defect), init.make(grid), times,
                                 cfg, default_sample_options(defect.site));
    std::vector<double> avg;
    for (double c : centers) avg.push_back(time_averaged_p_defect(s, c - half_window, c + half_window));
    return avg;
}

struct DecayFit {
    std::vector<double> centers;
    std::vector<double> averages;
    double slope = 0.0;
};

/// Log-log slope of the time-averaged P at the defect over log-spaced centres in [t_lo, t_hi].
inline DecayFit p_defect_decay(const DefectSpec& defect, const InitialState& init, double t_lo, double t_hi,
                               std::size_t n_centers = 11, double half_window = 10.0,
                               std::size_t samples_per_window = 201, const PropagatorConfig& cfg = {},
                               const ModelParams& model = {})
{
    if (!(t_lo > half_window && t_hi > t_lo)) throw InvalidArgument("p_defect_decay: bad time window");
    DecayFit fit;
    fit.centers = log_spaced(t_lo, t_hi, n_centers);
    fit.averages = averaged_p_defect(defect, init, fit.centers, half_window, samples_per_window, cfg, model);
    fit.slope = log_log_slope(fit.centers, fit.averages, t_lo, t_hi);
    return fit;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepParam { xi, theta, theta_minus, theta_plus, omega, sigma0 };

inline const char* to_string(SweepParam p)
{
    switch (p) {
    case SweepParam::xi: return "xi";
    case SweepParam::theta: return "theta";
    case SweepParam::theta_minus: return "theta_minus";
    case SweepParam::theta_plus: return "theta_plus";
    case SweepParam::omega: return "omega";
    case SweepParam::sigma0: return "sigma0";
    }
    return "?";
}

inline SweepParam parse_sweep_param(std::string_view s)
{
    for (auto p : {SweepParam::xi, SweepParam::theta, SweepParam::theta_minus, SweepParam::theta_plus,
                   SweepParam::omega, SweepParam::sigma0})
        if (s == to_string(p)) return p;
    throw InvalidArgument("unknown sweep parameter '" + std::string(s) + "'");
}

/// Evenly spaced values min..max inclusive.
struct SweepAxis {
    SweepParam param = SweepParam::xi;
    double min = 0.0;
    double max = 1.0;
    std::size_t steps = 2;

    void validate() const
    {
        if (steps < 2) throw InvalidArgument(std::string("axis ") + to_string(param) + ": need at least 2 steps");
        if (!std::isfinite(min) || !std::isfinite(max))
            throw InvalidArgument(std::string("axis ") + to_string(param) + ": bounds must be finite");
    }

    double value(std::size_t k) const
    {
        if (k + 1 == steps) return max;
        return min + (max - min) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }

    std::vector<double> values() const
    {
        std::vector<double> v(steps);
        for (std::size_t k = 0; k < steps; ++k) v[k] = value(k);
        return v;
    }
};

/// How a scalar theta maps onto the two bond phases.
enum class PhaseMode { equal, opposite };

inline const char* to_string(PhaseMode m) { return m == PhaseMode::equal ? "equal" : "opposite"; }

struct SweepGrid {
    std::vector<SweepAxis> axes;
    InitialState init = InitialState::gaussian(1.0);
    double t_end = 1000.0;
    ModelParams model;
    Schedule schedule = Schedule::linear(21);
    /// Values of the parameters not swept.
    DefectSpec base{0, 1.0, 0.0, 0.0};

    std::size_t cardinality() const
    {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.steps;
        return n;
    }

    /// Axis values of the point with row-major index i (last axis fastest).
    std::vector<double> point(std::size_t i) const
    {
        std::vector<double> v(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            v[k] = axes[k].value(i % axes[k].steps);
            i /= axes[k].steps;
        }
        return v;
    }

    void validate() const
    {
        if (axes.empty()) throw InvalidArgument("SweepGrid: no axes");
        for (std::size_t i = 0; i < axes.size(); ++i) {
            axes[i].validate();
            for (std::size_t j = 0; j < i; ++j)
                if (axes[i].param == axes[j].param)
                    throw InvalidArgument(std::string("SweepGrid: axis ") + to_string(axes[i].param) +
                                          " given twice");
        }
        if (!(t_end > 0.0)) throw InvalidArgument("SweepGrid: t_end must be positive");
    }
};

struct SweepRecord {
    std::vector<double> parameters;
    DefectSpec defect;
    double omega = 0.0;
    double sigma0 = 0.0;
    double sigma = 0.0;
    double sigma_h = 0.0;
    double sigma_ratio = 0.0;
    double p_defect = 0.0;
    double trapped = 0.0;
    double mean_pos = 0.0;
    double alpha = 0.0;
    double leakage_max = 0.0;
    std::size_t chebyshev_terms = 0;
};

struct SweepResult {
    SweepGrid grid;
    PhaseMode mode = PhaseMode::opposite;
    PropagatorConfig config;
    /// Row-major over grid.axes.
    std::vector<SweepRecord> records;
    int half_width = 0;

    /// Index of the record with the largest sigma_ratio (first on ties).
    std::size_t argmax_ratio() const
    {
        if (records.empty()) throw EmptyResult("SweepResult: no records");
        std::size_t best = 0;
        for (std::size_t i = 1; i < records.size(); ++i)
            if (records[i].sigma_ratio > records[best].sigma_ratio) best = i;
        return best;
    }

    std::vector<double> column(double SweepRecord::*field) const
    {
        std::vector<double> v(records.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = records[i].*field;
        return v;
    }
};

namespace detail {

inline double max_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

inline bool is_null_defect(const DefectSpec& d)
{
    auto zero_mod_2pi = [](double th) { return std::abs(std::remainder(th, 2.0 * pi)) < 1e-15; };
    return d.xi == 1.0 && zero_mod_2pi(d.theta_minus) && zero_mod_2pi(d.theta_plus);
}

inline void apply_parameter(SweepParam p, double v, PhaseMode mode, DefectSpec& d, InitialState& init,
                            double& omega)
{
    switch (p) {
    case SweepParam::xi: d.xi = v; break;
    case SweepParam::theta:
        d.theta_minus = v;
        d.theta_plus = mode == PhaseMode::equal ? v : -v;
        break;
    case SweepParam::theta_minus: d.theta_minus = v; break;
    case SweepParam::theta_plus: d.theta_plus = v; break;
    case SweepParam::omega: omega = v; break;
    case SweepParam::sigma0:
        if (!(v > 0.0)) throw InvalidArgument("sigma0 axis values must be positive");
        init = InitialState::gaussian(v);
        break;
    }
}

/// Spreading rate, or NaN when the schedule is too sparse to fit one.
inline double fitted_alpha(const TimeSeries& s)
{
    try {
        return spreading_rate(s).alpha;
    } catch (const InsufficientSamples&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

inline SweepRecord make_record(std::vector<double> params, const DefectSpec& d, double omega,
                               const InitialState& init, const TimeSeries& s, const TimeSeries& h)
{
    SweepRecord r;
    r.parameters = std::move(params);
    r.defect = d;
    r.omega = omega;
    r.sigma0 = init.extent();
    r.sigma = s.sigma.back();
    r.sigma_h = h.sigma.back();
    r.sigma_ratio = spreading_ratio(s, h);
    r.p_defect = s.p_defect.back();
    r.trapped = s.trapped.back();
    r.mean_pos = s.mean_pos.back();
    r.alpha = fitted_alpha(s);
    r.leakage_max = std::max(max_of(s.leakage), max_of(h.leakage));
    r.chebyshev_terms = s.max_chebyshev_terms;
    return r;
}

/// Homogeneous twins keyed by initial state, computed once each.
class TwinCache {
public:
    TwinCache(const SweepGrid& g, const PropagatorConfig& cfg, const std::vector<InitialState>& inits,
              unsigned workers)
    {
        for (const auto& s : inits)
            if (std::find_if(keys_.begin(), keys_.end(), [&](const auto& k) { return same(k, s); }) ==
                keys_.end())
                keys_.push_back(s);
        series_.resize(keys_.size());
        parallel_for(keys_.size(), workers, [&](std::size_t i) {
            series_[i] = run_single(std::nullopt, keys_[i], g.t_end, g.schedule, cfg, g.model);
        });
    }

    const TimeSeries& get(const InitialState& s) const
    {
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (same(keys_[i], s)) return series_[i];
        throw InvalidArgument("TwinCache: unknown initial state");
    }

private:
    static bool same(const InitialState& a, const InitialState& b)
    {
        return a.kind == b.kind && a.extent() == b.extent();
    }
    std::vector<InitialState> keys_;
    std::vector<TimeSeries> series_;
};

inline void check_null_point(const SweepRecord& r)
{
    if (is_null_defect(r.defect) && std::abs(r.sigma_ratio - 1.0) > 1e-6)
        throw NumericFailure("sweep self-check: null-defect ratio " + std::to_string(r.sigma_ratio) +
                             " differs from 1");
}

inline SweepResult static_sweep(const SweepGrid& g, PhaseMode mode, const PropagatorConfig& cfg,
                                unsigned workers)
{
    g.validate();
    cfg.validate();
    for (const auto& a : g.axes)
        if (a.param == SweepParam::omega)
            throw InvalidArgument("omega is only meaningful for an alternation scan");
    const std::size_t n = g.cardinality();
    std::vector<DefectSpec> defects(n, g.base);
    std::vector<InitialState> inits(n, g.init);
    std::vector<std::vector<double>> params(n);
    for (std::size_t i = 0; i < n; ++i) {
        params[i] = g.point(i);
        double unused = 0.0;
        for (std::size_t k = 0; k < g.axes.size(); ++k)
            apply_parameter(g.axes[k].param, params[i][k], mode, defects[i], inits[i], unused);
    }
    const TwinCache twins(g, cfg, inits, workers);

    SweepResult out;
    out.grid = g;
    out.mode = mode;
    out.config = cfg;
    out.records.resize(n);
    out.half_width = grid_for(g.t_end, g.init, g.model).half_width();
    parallel_for(n, workers, [&](std::size_t i) {
        const auto s = run_single(defects[i], inits[i], g.t_end, g.schedule, cfg, g.model);
        out.records[i] = make_record(params[i], defects[i], 0.0, inits[i], s, twins.get(inits[i]));
        check_null_point(out.records[i]);
    });
    return out;
}

}  // namespace detail

/// One-dimensional sweep over xi, theta, theta_minus, theta_plus or sigma0.
inline SweepResult sweep_1d(const SweepGrid& g, PhaseMode mode, const PropagatorConfig& cfg = {},
                            unsigned workers = default_worker_count())
{
    if (g.axes.size() != 1)
        throw ConflictError("sweep_1d: exactly one axis required, got " + std::to_string(g.axes.size()));
    return detail::static_sweep(g, mode, cfg, workers);
}

/// Two-dimensional map over (xi, theta).
inline SweepResult contour_map(const SweepGrid& g, PhaseMode mode = PhaseMode::opposite,
                               const PropagatorConfig& cfg = {}, unsigned workers = default_worker_count())
{
    if (g.axes.size() != 2)
        throw ConflictError("contour_map: exactly two axes required, got " + std::to_string(g.axes.size()));
    return detail::static_sweep(g, mode, cfg, workers);
}

inline std::vector<double> default_omegas() { return log_spaced(0.05, 20.0, 60); }

struct OmegaScan {
    SweepResult result;
    std::vector<double> omegas;
    double best_omega = 0.0;
    double best_ratio = 0.0;
};

/// Ratio of the alternation protocol against the homogeneous walk for each omega.
inline OmegaScan omega_scan(const DefectSpec& a, const DefectSpec& b, const std::vector<double>& omegas,
                            const InitialState& init, double t_end, const Schedule& schedule = Schedule::linear(21),
                            const PropagatorConfig& cfg = {}, const ModelParams& model = {},
                            unsigned workers = default_worker_count(), bool b_first = false)
{
    if (omegas.empty()) throw InvalidArgument("omega_scan: no omega values");
    for (double w : omegas)
        if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("omega_scan: omega values must be positive");
    cfg.validate();

    OmegaScan out;
    out.omegas = omegas;
    SweepGrid& g = out.result.grid;
    g.axes = {{SweepParam::omega, omegas.front(), omegas.back(), omegas.size()}};
    g.init = init;
    g.t_end = t_end;
    g.model = model;
    g.schedule = schedule;
    g.base = a;
    out.result.mode = PhaseMode::opposite;
    out.result.config = cfg;
    out.result.half_width = grid_for(t_end, init, model).half_width();

    const TimeSeries h = run_single(std::nullopt, init, t_end, schedule, cfg, model);
    out.result.records.resize(omegas.size());
    parallel_for(omegas.size(), workers, [&](std::size_t i) {
        const auto s = run_protocol(a, b, omegas[i], init, t_end, schedule, cfg, model,
                                    default_sample_options(), b_first);
        out.result.records[i] = detail::make_record({omegas[i]}, a, omegas[i], init, s, h);
    });
    const std::size_t best = out.result.argmax_ratio();
    out.best_omega = omegas[best];
    out.best_ratio = out.result.records[best].sigma_ratio;
    return out;
}

struct ParrondoComparison {
    std::string name_a;
    std::string name_b;
    double omega = 0.0;
    TimeSeries series_a;
    TimeSeries series_b;
    TimeSeries series_ab;
    TimeSeries series_h;
};

/// Both catalog strategies alone, their alternation, and the homogeneous walk,
/// from the same initial state on the same grid and schedule.
inline ParrondoComparison parrondo_compare(std::string_view name_a, std::string_view name_b, double omega,
                                           const InitialState& init, double t_end, const Schedule& schedule,
                                           const PropagatorConfig& cfg = {}, const ModelParams& model = {},
                                           unsigned workers = default_worker_count())
{
    const DefectSpec& a = StrategyCatalog::get(name_a);
    const DefectSpec& b = StrategyCatalog::get(name_b);
    cfg.validate();
    ParrondoComparison out;
    out.name_a = std::string(name_a);
    out.name_b = std::string(name_b);
    out.omega = omega;
    SampleOptions opt = default_sample_options();
    opt.keep_final_snapshot = true;
    TimeSeries* slots[4] = {&out.series_a, &out.series_b, &out.series_ab, &out.series_h};
    parallel_for(4, workers, [&](std::size_t i) {
        switch (i) {
        case 0: *slots[i] = run_single(a, init, t_end, schedule, cfg, model, opt); break;
        case 1: *slots[i] = run_single(b, init, t_end, schedule, cfg, model, opt); break;
        case 2: *slots[i] = run_protocol(a, b, omega, init, t_end, schedule, cfg, model, opt); break;
        default: *slots[i] = run_single(std::nullopt, init, t_end, schedule, cfg, model, opt); break;
        }
    });
    return out;
}

}  // namespace ctqw

#endif  // CTQW_EXPERIMENTS_HPP
