#ifndef CTQW_OBSERVABLES_HPP
#define CTQW_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/states.hpp"

namespace ctqw {

/// Distribution P(j) at one instant.
struct Snapshot {
    double time = 0.0;
    std::vector<double> probability;
};

/// Observables sampled along one evolution. All per-sample vectors share the
/// length of `times`.
struct TimeSeries {
    SiteGrid grid;
    std::vector<double> times;
    std::vector<double> sigma;
    std::vector<double> mean_pos;
    std::vector<double> p_defect;
    std::vector<double> trapped;
    std::vector<double> leakage;
    std::vector<Snapshot> snapshots;

    // Propagation diagnostics.
    std::size_t max_chebyshev_terms = 0;
    double max_norm_drift = 0.0;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    double final_sigma() const { return sigma.back(); }
};

struct SpreadFit {
    double alpha = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double residual_rms = 0.0;
    std::size_t samples = 0;
};

struct Moments {
    double mean = 0.0;
    double sigma = 0.0;
};

inline std::vector<double> position_distribution(const WaveState& psi)
{
    std::vector<double> p(psi.amp.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(psi.amp[i]);
    return p;
}

inline Moments moments(const SiteGrid& grid, const std::vector<double>& p)
{
    // Accumulate in (j - 0) with a two-pass mean to keep the radicand clean.
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += p[i];
        first += grid.site(i) * p[i];
    }
    const double mean = first / total;
    double second = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dj = grid.site(i) - mean;
        second += dj * dj * p[i];
    }
    double var = second / total;
    if (var < 0.0) {
        if (var < -1e-12) throw NegativeVariance("moments: variance " + std::to_string(var));
        var = 0.0;
    }
    return {mean, std::sqrt(var)};
}

inline Moments moments(const WaveState& psi)
{
    return moments(psi.grid, position_distribution(psi));
}

inline double window_probability(const SiteGrid& grid, const std::vector<double>& p, int center,
                                 int radius)
{
    if (radius < 0) throw InvalidArgument("window_probability: radius must be nonnegative");
    const int lo = std::max(center - radius, grid.min_site());
    const int hi = std::min(center + radius, grid.max_site());
    if (lo > hi) throw InvalidArgument("window_probability: window misses the grid");
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += p[grid.index(j)];
    return s;
}

inline double window_probability(const WaveState& psi, int center, int radius)
{
    return window_probability(psi.grid, position_distribution(psi), center, radius);
}

/// Probability held by the outermost guard_width sites on each side.
inline double boundary_leakage(const SiteGrid& grid, const std::vector<double>& p, int guard_width)
{
    if (guard_width < 1 || guard_width >= grid.half_width())
        throw InvalidArgument("boundary_leakage: guard width must lie in [1, M)");
    const std::size_t g = static_cast<std::size_t>(guard_width);
    double s = 0.0;
    for (std::size_t i = 0; i < g; ++i) s += p[i] + p[p.size() - 1 - i];
    return s;
}

inline double boundary_leakage(const WaveState& psi, int guard_width)
{
    return boundary_leakage(psi.grid, position_distribution(psi), guard_width);
}

/// Least-squares line through sigma(t) over the last window_fraction of the run.
inline SpreadFit spreading_rate(const TimeSeries& series, double window_fraction = 0.5)
{
    if (!(window_fraction > 0.0 && window_fraction < 1.0))
        throw InvalidArgument("spreading_rate: window fraction must lie in (0, 1)");
    if (series.empty()) throw InsufficientSamples("spreading_rate: empty series");
    const double t_max = series.times.back();
    const double t_lo = (1.0 - window_fraction) * t_max;

    double n = 0, st = 0, ss = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.times[i] < t_lo) continue;
        n += 1;
        st += series.times[i];
        ss += series.sigma[i];
    }
    if (n < 8)
        throw InsufficientSamples("spreading_rate: " + std::to_string(static_cast<int>(n)) +
                                  " samples in the fit window, need 8");
    const double tm = st / n, sm = ss / n;
    double stt = 0, sts = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.times[i] < t_lo) continue;
        const double dt = series.times[i] - tm;
        stt += dt * dt;
        sts += dt * (series.sigma[i] - sm);
    }
    SpreadFit fit;
    fit.alpha = sts / stt;
    fit.intercept = sm - fit.alpha * tm;
    fit.t_lo = t_lo;
    fit.t_hi = t_max;
    fit.samples = static_cast<std::size_t>(n);
    double r2 = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.times[i] < t_lo) continue;
        const double r = series.sigma[i] - (fit.intercept + fit.alpha * series.times[i]);
        r2 += r * r;
    }
    fit.residual_rms = std::sqrt(r2 / n);
    return fit;
}

/// sigma_d / sigma at the common final time.
inline double spreading_ratio(const TimeSeries& defective, const TimeSeries& homogeneous)
{
    if (defective.empty() || homogeneous.empty())
        throw MismatchedSeries("spreading_ratio: empty series");
    const double ta = defective.times.back(), tb = homogeneous.times.back();
    if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta)))
        throw MismatchedSeries("spreading_ratio: final times differ");
    if (!(defective.grid == homogeneous.grid))
        throw MismatchedSeries("spreading_ratio: series live on different grids");
    return defective.sigma.back() / homogeneous.sigma.back();
}

/// Ratio sigma_d/sigma at every shared sample.
inline std::vector<double> spreading_ratio_curve(const TimeSeries& defective,
                                                 const TimeSeries& homogeneous)
{
    if (defective.times != homogeneous.times)
        throw MismatchedSeries("spreading_ratio_curve: sample times differ");
    std::vector<double> r(defective.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = homogeneous.sigma[i] > 0 ? defective.sigma[i] / homogeneous.sigma[i] : 1.0;
    return r;
}

/// Mean of P at the defect over the samples with t in [t_lo, t_hi].
inline double time_averaged_p_defect(const TimeSeries& s, double t_lo, double t_hi)
{
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.times[i] >= t_lo && s.times[i] <= t_hi) {
            acc += s.p_defect[i];
            ++n;
        }
    if (n == 0) throw InsufficientSamples("time_averaged_p_defect: no samples in window");
    return acc / static_cast<double>(n);
}

/// Least-squares slope of log(y) against log(t) over t in [t_lo, t_hi].
inline double log_log_slope(const std::vector<double>& t, const std::vector<double>& y,
                            double t_lo, double t_hi)
{
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || !(t[i] > 0) || !(y[i] > 0)) continue;
        const double lx = std::log(t[i]), ly = std::log(y[i]);
        n += 1;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    if (n < 2) throw InsufficientSamples("log_log_slope: fewer than two usable samples");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ctqw

#endif  // CTQW_OBSERVABLES_HPP
