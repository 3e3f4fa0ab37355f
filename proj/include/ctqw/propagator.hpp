#ifndef CTQW_PROPAGATOR_HPP
#define CTQW_PROPAGATOR_HPP

// Time evolution psi(t) = exp(-iHt) psi(0) with hbar = 1.
//
// Two engines share one interface:
//   chebyshev  - Bessel-weighted Chebyshev expansion on the Gershgorin
//                interval, tridiagonal matvecs only; O(N * a t).
//   reference  - gauge reduction to a real tridiagonal matrix, full
//                eigendecomposition, exact phases; O(N^3) setup, for
//                validation on small grids.
//
// ProtocolPropagator applies the two-strategy alternation: segments of
// length pi/omega, even segments under strategy A, odd under B.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/model.hpp"
#include "ctqw/observables.hpp"
#include "ctqw/special.hpp"
#include "ctqw/states.hpp"
#include "ctqw/tridiagonal_eigen.hpp"

namespace ctqw {

enum class Engine { chebyshev, reference };

inline const char* to_string(Engine e) { return e == Engine::chebyshev ? "chebyshev" : "reference"; }

struct PropagatorConfig {
    Engine engine = Engine::chebyshev;
    double tolerance = 1e-13;
    /// Hard cap on the expansion order; when unset the cap is derived from a t.
    std::optional<std::size_t> max_terms;

    void validate() const
    {
        if (!(tolerance > 0.0 && tolerance <= 1e-6))
            throw InvalidArgument("PropagatorConfig: tolerance must lie in (0, 1e-6]");
        if (max_terms && *max_terms < 16)
            throw InvalidArgument("PropagatorConfig: max_terms must be at least 16");
    }
};

/// Per-call bookkeeping, accumulated across calls on one propagator.
struct EvolveStats {
    std::size_t max_terms_used = 0;
    std::size_t calls = 0;
    double max_norm_drift = 0.0;
    std::size_t renormalizations = 0;
};

/// Default expansion cap for argument x = a t. J_k(x) has dropped below 1e-16
/// well before k = x + 10 x^{1/3} + 40.
inline std::size_t default_chebyshev_cap(double x)
{
    return 40 + static_cast<std::size_t>(std::ceil(1.2 * x + 10.0 * std::cbrt(x)));
}

namespace detail {

inline void check_grid(const Hamiltonian& h, const WaveState& psi)
{
    if (!(h.grid == psi.grid) || psi.amp.size() != h.size())
        throw GridMismatch("evolve: state and Hamiltonian live on different grids");
}

inline void renormalize_if_drifted(WaveState& psi, EvolveStats& stats)
{
    const double nrm = psi.norm();
    const double drift = std::abs(nrm - 1.0);
    stats.max_norm_drift = std::max(stats.max_norm_drift, drift);
    if (drift > 1e-10) {
        for (auto& a : psi.amp) a /= nrm;
        ++stats.renormalizations;
    }
}

}  // namespace detail

class ChebyshevEngine {
public:
    ChebyshevEngine(const Hamiltonian& h, const PropagatorConfig& cfg) : h_(&h), cfg_(cfg)
    {
        const auto b = spectral_bounds(h);
        center_ = 0.5 * (b.upper + b.lower);
        half_width_ = 0.5 * (b.upper - b.lower) * 1.01;
        work_.resize(3 * h.size());
    }

    double center() const noexcept { return center_; }
    double half_width() const noexcept { return half_width_; }

    /// Number of expansion terms kept: the first order k > x at which |J_k|
    /// stays below tol for four consecutive orders (0 if never within jk).
    static std::size_t truncation_order(const std::vector<double>& jk, double x, double tol)
    {
        for (std::size_t k = 1; k + 3 < jk.size(); ++k) {
            if (static_cast<double>(k) <= x) continue;
            if (std::abs(jk[k]) < tol && std::abs(jk[k + 1]) < tol && std::abs(jk[k + 2]) < tol &&
                std::abs(jk[k + 3]) < tol)
                return std::max<std::size_t>(k, 2);
        }
        return 0;
    }

    void advance(WaveState& psi, double t, EvolveStats& stats)
    {
        const std::size_t n = h_->size();
        const cplx global = std::polar(1.0, -center_ * t);
        if (half_width_ == 0.0) {
            for (auto& a : psi.amp) a *= global;
            return;
        }
        const double x = half_width_ * t;
        if (x != cached_x_) {
            const std::size_t cap = cfg_.max_terms ? *cfg_.max_terms : default_chebyshev_cap(x);
            jk_ = special::bessel_j_sequence(x, cap);
            order_ = truncation_order(jk_, x, cfg_.tolerance);
            if (order_ == 0)
                throw ConvergenceFailure("chebyshev: expansion did not reach tolerance within " +
                                         std::to_string(cap) + " terms (a t = " +
                                         std::to_string(x) + ")");
            cached_x_ = x;
        }
        const auto& jk = jk_;
        const std::size_t order = order_;

        std::span<cplx> prev(work_.data(), n), cur(work_.data() + n, n), next(work_.data() + 2 * n, n);
        std::vector<cplx> acc(n);
        static constexpr std::array<cplx, 4> minus_i_pow = {cplx(1, 0), cplx(0, -1), cplx(-1, 0),
                                                             cplx(0, 1)};
        const double inv = 1.0 / half_width_;

        std::copy(psi.amp.begin(), psi.amp.end(), prev.begin());
        // T_1 = H' psi
        h_->apply(prev, cur);
        for (std::size_t i = 0; i < n; ++i) cur[i] = (cur[i] - center_ * prev[i]) * inv;
        const cplx c0 = jk[0];
        const cplx c1 = 2.0 * jk[1] * minus_i_pow[1];
        for (std::size_t i = 0; i < n; ++i) acc[i] = c0 * prev[i] + c1 * cur[i];

        for (std::size_t k = 2; k < order; ++k) {
            h_->apply(cur, next);
            const cplx ck = 2.0 * jk[k] * minus_i_pow[k % 4];
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = 2.0 * (next[i] - center_ * cur[i]) * inv - prev[i];
                acc[i] += ck * next[i];
            }
            std::swap(prev, cur);
            std::swap(cur, next);
        }
        for (std::size_t i = 0; i < n; ++i) psi.amp[i] = global * acc[i];
        stats.max_terms_used = std::max(stats.max_terms_used, order);
    }

private:
    const Hamiltonian* h_;
    PropagatorConfig cfg_;
    double center_ = 0.0;
    double half_width_ = 0.0;
    std::vector<cplx> work_;
    double cached_x_ = -1.0;
    std::vector<double> jk_;
    std::size_t order_ = 0;
};

class ReferenceEngine {
public:
    explicit ReferenceEngine(const Hamiltonian& h)
    {
        gauge_ = gauge_reduce(h);
        std::vector<double> off(gauge_.tridiag_offdiag.size());
        for (std::size_t i = 0; i < off.size(); ++i) off[i] = -gauge_.tridiag_offdiag[i];
        eig_ = tridiagonal_eigen(gauge_.tridiag_diag, off);
    }

    const TridiagonalEigen& eigen() const noexcept { return eig_; }
    const GaugeReduction& gauge() const noexcept { return gauge_; }

    void advance(WaveState& psi, double t, EvolveStats&) const
    {
        const std::size_t n = eig_.n;
        std::vector<cplx> chi(n);
        for (std::size_t i = 0; i < n; ++i) chi[i] = std::polar(1.0, -gauge_.phases[i]) * psi.amp[i];
        std::vector<cplx> coef(n, cplx{});
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &eig_.vectors[i * n];
            const cplx ci = chi[i];
            for (std::size_t k = 0; k < n; ++k) coef[k] += row[k] * ci;
        }
        for (std::size_t k = 0; k < n; ++k) coef[k] *= std::polar(1.0, -eig_.values[k] * t);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &eig_.vectors[i * n];
            cplx s{};
            for (std::size_t k = 0; k < n; ++k) s += row[k] * coef[k];
            psi.amp[i] = std::polar(1.0, gauge_.phases[i]) * s;
        }
    }

private:
    GaugeReduction gauge_;
    TridiagonalEigen eig_;
};

/// Propagator for one static Hamiltonian. Holds engine state (bounds or the
/// eigendecomposition) so repeated advances are cheap. Keeps a copy of H.
class StaticPropagator {
public:
    StaticPropagator(Hamiltonian h, PropagatorConfig cfg) : h_(std::move(h)), cfg_(cfg)
    {
        cfg_.validate();
        if (cfg_.engine == Engine::chebyshev)
            engine_.emplace<ChebyshevEngine>(h_, cfg_);
        else
            engine_.emplace<ReferenceEngine>(h_);
    }
    StaticPropagator(const StaticPropagator&) = delete;
    StaticPropagator& operator=(const StaticPropagator&) = delete;

    const Hamiltonian& hamiltonian() const noexcept { return h_; }
    const PropagatorConfig& config() const noexcept { return cfg_; }
    const EvolveStats& stats() const noexcept { return stats_; }

    /// psi <- exp(-iHt) psi.
    void advance(WaveState& psi, double t)
    {
        detail::check_grid(h_, psi);
        if (!(t >= 0.0) || !std::isfinite(t))
            throw InvalidArgument("evolve: duration must be finite and nonnegative");
        if (t == 0.0) return;
        std::visit(
            [&](auto& e) {
                if constexpr (!std::is_same_v<std::decay_t<decltype(e)>, std::monostate>)
                    e.advance(psi, t, stats_);
            },
            engine_);
        ++stats_.calls;
        detail::renormalize_if_drifted(psi, stats_);
    }

private:
    Hamiltonian h_;
    PropagatorConfig cfg_;
    std::variant<std::monostate, ChebyshevEngine, ReferenceEngine> engine_;
    EvolveStats stats_;
};

inline WaveState evolve(const Hamiltonian& h, const WaveState& psi, double t,
                        const PropagatorConfig& cfg = {}, EvolveStats* stats = nullptr)
{
    detail::check_grid(h, psi);
    WaveState out = psi;
    if (t == 0.0) return out;
    StaticPropagator prop(h, cfg);
    prop.advance(out, t);
    if (stats) *stats = prop.stats();
    return out;
}

struct ProtocolSpec {
    SiteGrid grid;
    double gamma = 1.0;
    double epsilon = 0.0;
    DefectSpec strategy_a;
    DefectSpec strategy_b;
    double omega = 1.0;
    /// Start the alternation with strategy B instead of A.
    bool b_first = false;

    double half_period() const { return std::numbers::pi / omega; }
    double period() const { return 2.0 * std::numbers::pi / omega; }

    void validate() const
    {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw InvalidArgument("ProtocolSpec: omega must be positive and finite");
        if (strategy_a.site != strategy_b.site)
            throw InvalidArgument("ProtocolSpec: both strategies must act on the same site");
    }
};

/// Stateful alternation driver: remembers the elapsed time and the active
/// segment so evolution can be resumed sample by sample.
class ProtocolPropagator {
public:
    ProtocolPropagator(const ProtocolSpec& p, const PropagatorConfig& cfg)
        : spec_(p),
          a_((p.validate(), build_defective(p.grid, p.gamma, p.epsilon, p.strategy_a)), cfg),
          b_(build_defective(p.grid, p.gamma, p.epsilon, p.strategy_b), cfg)
    {
    }

    const ProtocolSpec& spec() const noexcept { return spec_; }
    double time() const noexcept { return time_; }

    /// Evolve psi (currently at time()) forward to absolute time target.
    void advance_to(WaveState& psi, double target)
    {
        if (target < time_) throw InvalidArgument("protocol: cannot evolve backwards in time");
        const double h = spec_.half_period();
        while (time_ < target) {
            const double seg_end = static_cast<double>(segment_ + 1) * h;
            const bool use_a = (segment_ % 2 == 0) != spec_.b_first;
            StaticPropagator& prop = use_a ? a_ : b_;
            if (seg_end <= target + 1e-12 * std::max(1.0, target)) {
                prop.advance(psi, seg_end - time_);
                time_ = seg_end;
                ++segment_;
                if (time_ > target) time_ = target;
            } else {
                prop.advance(psi, target - time_);
                time_ = target;
            }
        }
    }

    EvolveStats stats() const
    {
        EvolveStats s = a_.stats();
        const auto& o = b_.stats();
        s.max_terms_used = std::max(s.max_terms_used, o.max_terms_used);
        s.calls += o.calls;
        s.max_norm_drift = std::max(s.max_norm_drift, o.max_norm_drift);
        s.renormalizations += o.renormalizations;
        return s;
    }

private:
    ProtocolSpec spec_;
    StaticPropagator a_;
    StaticPropagator b_;
    double time_ = 0.0;
    std::size_t segment_ = 0;
};

/// Snapshots of the alternation at each requested time (ascending, within
/// [0, t_end]); the last element is always the state at t_end.
inline std::vector<WaveState> evolve_protocol(const ProtocolSpec& p, const WaveState& psi,
                                              double t_end, const std::vector<double>& sample_times,
                                              const PropagatorConfig& cfg = {})
{
    if (!(p.grid == psi.grid)) throw GridMismatch("evolve_protocol: grid mismatch");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 || sample_times[i] > t_end)
            throw InvalidArgument("evolve_protocol: sample times must lie in [0, t_end]");
        if (i > 0 && sample_times[i] < sample_times[i - 1])
            throw InvalidArgument("evolve_protocol: sample times must be ascending");
    }
    ProtocolPropagator prop(p, cfg);
    WaveState cur = psi;
    std::vector<WaveState> out;
    out.reserve(sample_times.size() + 1);
    for (double t : sample_times) {
        prop.advance_to(cur, t);
        out.push_back(cur);
    }
    if (sample_times.empty() || sample_times.back() < t_end) {
        prop.advance_to(cur, t_end);
        out.push_back(cur);
    }
    return out;
}

/// What sample_series records besides sigma and the mean.
struct SampleOptions {
    int defect_site = 0;
    int trap_radius = 4;
    int guard_width = 8;
    double leakage_limit = 1e-8;
    /// Keep P(j) at the final sample.
    bool keep_final_snapshot = false;
    /// Keep P(j) at these sample indices too.
    std::vector<std::size_t> snapshot_indices;
};

namespace detail {

inline void record_sample(TimeSeries& s, const WaveState& psi, double t, const SampleOptions& opt,
                          bool snapshot)
{
    const auto p = position_distribution(psi);
    const auto m = moments(psi.grid, p);
    const int guard = std::min(opt.guard_width, psi.grid.half_width() - 1);
    const double leak = boundary_leakage(psi.grid, p, guard);
    s.times.push_back(t);
    s.sigma.push_back(m.sigma);
    s.mean_pos.push_back(m.mean);
    s.p_defect.push_back(psi.grid.contains(opt.defect_site) ? p[psi.grid.index(opt.defect_site)] : 0.0);
    s.trapped.push_back(window_probability(psi.grid, p, opt.defect_site, opt.trap_radius));
    s.leakage.push_back(leak);
    if (snapshot) s.snapshots.push_back({t, p});
    if (leak > opt.leakage_limit)
        throw LatticeTooSmall("boundary leakage " + std::to_string(leak) + " at t = " +
                              std::to_string(t) + " exceeds " + std::to_string(opt.leakage_limit) +
                              " (M = " + std::to_string(psi.grid.half_width()) + ")");
}

inline void check_times(const std::vector<double>& times)
{
    if (times.empty()) throw InvalidArgument("sample_series: no sample times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw InvalidArgument("sample_series: negative sample time");
        if (i > 0 && times[i] < times[i - 1])
            throw InvalidArgument("sample_series: sample times must be ascending");
    }
}

inline bool wants_snapshot(const SampleOptions& opt, std::size_t i, std::size_t n)
{
    if (opt.keep_final_snapshot && i + 1 == n) return true;
    return std::find(opt.snapshot_indices.begin(), opt.snapshot_indices.end(), i) !=
           opt.snapshot_indices.end();
}

}  // namespace detail

/// Observables of exp(-iHt) psi0 at each time, evolving incrementally.
inline TimeSeries sample_series(const Hamiltonian& h, const WaveState& psi0,
                                const std::vector<double>& times, const PropagatorConfig& cfg = {},
                                const SampleOptions& opt = {})
{
    detail::check_times(times);
    detail::check_grid(h, psi0);
    StaticPropagator prop(h, cfg);
    TimeSeries s;
    s.grid = psi0.grid;
    WaveState psi = psi0;
    double t = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        prop.advance(psi, times[i] - t);
        t = times[i];
        detail::record_sample(s, psi, t, opt, detail::wants_snapshot(opt, i, times.size()));
    }
    s.max_chebyshev_terms = prop.stats().max_terms_used;
    s.max_norm_drift = prop.stats().max_norm_drift;
    return s;
}

/// Observables under the alternation protocol at each time.
inline TimeSeries sample_series(const ProtocolSpec& p, const WaveState& psi0,
                                const std::vector<double>& times, const PropagatorConfig& cfg = {},
                                const SampleOptions& opt = {})
{
    detail::check_times(times);
    if (!(p.grid == psi0.grid)) throw GridMismatch("sample_series: grid mismatch");
    ProtocolPropagator prop(p, cfg);
    TimeSeries s;
    s.grid = psi0.grid;
    WaveState psi = psi0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        prop.advance_to(psi, times[i]);
        detail::record_sample(s, psi, times[i], opt, detail::wants_snapshot(opt, i, times.size()));
    }
    s.max_chebyshev_terms = prop.stats().max_terms_used;
    s.max_norm_drift = prop.stats().max_norm_drift;
    return s;
}

}  // namespace ctqw

#endif  // CTQW_PROPAGATOR_HPP
