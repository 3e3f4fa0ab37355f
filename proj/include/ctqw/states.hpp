#ifndef CTQW_STATES_HPP
#define CTQW_STATES_HPP

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/model.hpp"

namespace ctqw {

struct WaveState {
    SiteGrid grid;
    std::vector<cplx> amp;

    cplx at(int j) const { return amp[grid.index(j)]; }

    double norm() const
    {
        double s = 0.0;
        for (const auto& a : amp) s += std::norm(a);
        return std::sqrt(s);
    }
};

inline WaveState localized_state(const SiteGrid& grid, int j0)
{
    if (!grid.contains(j0))
        throw SiteOutOfGrid("localized_state: site " + std::to_string(j0) + " outside grid");
    WaveState psi{grid, std::vector<cplx>(grid.size())};
    psi.amp[grid.index(j0)] = 1.0;
    return psi;
}

/// Real Gaussian amplitudes exp(-(j-center)^2 / (4 sigma0^2)) normalized by
/// the discrete sum. The grid must hold 8 sigma0 on both sides of center.
inline WaveState gaussian_state(const SiteGrid& grid, double sigma0, int center = 0)
{
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
        throw InvalidArgument("gaussian_state: sigma0 must be positive");
    if (!grid.contains(center))
        throw SiteOutOfGrid("gaussian_state: center " + std::to_string(center) + " outside grid");
    if (grid.half_width() < std::abs(center) + 8.0 * sigma0)
        throw GridTooSmall("gaussian_state: half width " + std::to_string(grid.half_width()) +
                           " cannot hold 8 sigma0 around the center");

    WaveState psi{grid, std::vector<cplx>(grid.size())};
    const double inv = 1.0 / (4.0 * sigma0 * sigma0);
    double sum = 0.0;
    std::vector<double> a(grid.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = grid.site(i) - center;
        a[i] = std::exp(-x * x * inv);
        sum += a[i] * a[i];
    }
    const double scale = 1.0 / std::sqrt(sum);
    for (std::size_t i = 0; i < a.size(); ++i) psi.amp[i] = a[i] * scale;
    return psi;
}

/// S|j> = (-1)^j |j>.
inline WaveState sublattice_flip(const WaveState& psi)
{
    WaveState out = psi;
    for (std::size_t i = 0; i < out.amp.size(); ++i)
        if (psi.grid.site(i) % 2 != 0) out.amp[i] = -out.amp[i];
    return out;
}

/// amp'(j) = amp(-j).
inline WaveState reflect(const WaveState& psi)
{
    WaveState out = psi;
    const std::size_t n = psi.amp.size();
    for (std::size_t i = 0; i < n; ++i) out.amp[i] = psi.amp[n - 1 - i];
    return out;
}

}  // namespace ctqw

#endif  // CTQW_STATES_HPP
