#ifndef CTQW_MODEL_HPP
#define CTQW_MODEL_HPP

// Tight-binding chain with a single complex-phase defect.
//
// Sites j = -M..M are stored at index i = j + M. Only the band below the
// diagonal is stored (lower[i] = <i+1|H|i>); the band above is its complex
// conjugate, so every Hamiltonian built here is Hermitian by construction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ctqw/errors.hpp"

namespace ctqw {

using cplx = std::complex<double>;

class SiteGrid {
public:
    SiteGrid() = default;
    explicit SiteGrid(int half_width) : half_width_(half_width)
    {
        if (half_width < 1)
            throw InvalidArgument("SiteGrid: half width must be positive, got " +
                                  std::to_string(half_width));
    }

    int half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(2 * half_width_ + 1); }
    int min_site() const noexcept { return -half_width_; }
    int max_site() const noexcept { return half_width_; }
    bool contains(int j) const noexcept { return j >= -half_width_ && j <= half_width_; }

    std::size_t index(int j) const noexcept { return static_cast<std::size_t>(j + half_width_); }
    int site(std::size_t i) const noexcept { return static_cast<int>(i) - half_width_; }

    friend bool operator==(const SiteGrid&, const SiteGrid&) = default;

private:
    int half_width_ = 1;
};

/// Defect at site `site`: the bond to the left carries -γ ξ e^{iθ-} (read
/// from d-1 to d) and the bond to the right carries -γ ξ e^{iθ+} (read from
/// d to d+1).
struct DefectSpec {
    int site = 0;
    double xi = 1.0;
    double theta_minus = 0.0;
    double theta_plus = 0.0;

    friend bool operator==(const DefectSpec&, const DefectSpec&) = default;
};

struct Hamiltonian {
    SiteGrid grid;
    double gamma = 1.0;
    double epsilon = 0.0;
    std::vector<double> diag;
    std::vector<cplx> lower;

    std::size_t size() const noexcept { return diag.size(); }

    /// Matrix element <row|H|col> by storage index.
    cplx element(std::size_t row, std::size_t col) const noexcept
    {
        if (row == col) return diag[row];
        if (row == col + 1) return lower[col];
        if (col == row + 1) return std::conj(lower[row]);
        return {};
    }

    /// y = H x. Spans must both have length size().
    void apply(std::span<const cplx> x, std::span<cplx> y) const noexcept
    {
        const std::size_t n = diag.size();
        if (n == 1) {
            y[0] = diag[0] * x[0];
            return;
        }
        y[0] = diag[0] * x[0] + std::conj(lower[0]) * x[1];
        for (std::size_t i = 1; i + 1 < n; ++i)
            y[i] = lower[i - 1] * x[i - 1] + diag[i] * x[i] + std::conj(lower[i]) * x[i + 1];
        y[n - 1] = lower[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
    }

    /// Row-major dense copy, for small test problems only.
    std::vector<cplx> dense() const
    {
        const std::size_t n = size();
        std::vector<cplx> m(n * n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) m[r * n + c] = element(r, c);
        return m;
    }
};

inline Hamiltonian build_homogeneous(const SiteGrid& grid, double gamma, double epsilon = 0.0)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidArgument("build_homogeneous: gamma must be positive and finite");
    if (!std::isfinite(epsilon)) throw InvalidArgument("build_homogeneous: epsilon must be finite");
    Hamiltonian h;
    h.grid = grid;
    h.gamma = gamma;
    h.epsilon = epsilon;
    h.diag.assign(grid.size(), epsilon);
    h.lower.assign(grid.size() - 1, cplx(-gamma, 0.0));
    return h;
}

inline Hamiltonian build_defective(const SiteGrid& grid, double gamma, double epsilon,
                                   const DefectSpec& defect)
{
    if (std::abs(defect.site) >= grid.half_width())
        throw DefectOutOfGrid("build_defective: defect site " + std::to_string(defect.site) +
                              " needs both neighbours inside [-" +
                              std::to_string(grid.half_width()) + ", " +
                              std::to_string(grid.half_width()) + "]");
    if (!std::isfinite(defect.xi) || !std::isfinite(defect.theta_minus) ||
        !std::isfinite(defect.theta_plus))
        throw InvalidArgument("build_defective: defect parameters must be finite");

    Hamiltonian h = build_homogeneous(grid, gamma, epsilon);
    const std::size_t d = grid.index(defect.site);
    // <d-1|H|d> = -γξe^{iθ-}  =>  lower[d-1] = <d|H|d-1> = -γξe^{-iθ-}
    // <d|H|d+1> = -γξe^{iθ+}  =>  lower[d]   = <d+1|H|d> = -γξe^{-iθ+}
    h.lower[d - 1] = -gamma * defect.xi * std::polar(1.0, -defect.theta_minus);
    h.lower[d] = -gamma * defect.xi * std::polar(1.0, -defect.theta_plus);
    if (defect.xi == 0.0) {
        h.lower[d - 1] = 0.0;
        h.lower[d] = 0.0;
    }
    return h;
}

/// Diagonal-unitary reduction H = U R U^dagger with U = diag(e^{iφ}) and
/// R real symmetric tridiagonal with off-diagonal entries -offdiag[i].
struct GaugeReduction {
    std::vector<double> phases;
    std::vector<double> tridiag_diag;
    std::vector<double> tridiag_offdiag;  // nonnegative bond magnitudes
};

inline GaugeReduction gauge_reduce(const Hamiltonian& h)
{
    const std::size_t n = h.size();
    GaugeReduction g;
    g.phases.assign(n, 0.0);
    g.tridiag_diag = h.diag;
    g.tridiag_offdiag.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double mag = std::abs(h.lower[i]);
        g.tridiag_offdiag[i] = mag;
        const double bond_phase = mag > 0.0 ? std::arg(-h.lower[i]) : 0.0;
        g.phases[i + 1] = std::remainder(g.phases[i] + bond_phase, 2.0 * std::numbers::pi);
    }
    return g;
}

struct SpectralBounds {
    double lower;
    double upper;
};

/// Gershgorin enclosure of the spectrum.
inline SpectralBounds spectral_bounds(const Hamiltonian& h)
{
    const std::size_t n = h.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(h.lower[i - 1]);
        if (i + 1 < n) r += std::abs(h.lower[i]);
        lo = std::min(lo, h.diag[i] - r);
        hi = std::max(hi, h.diag[i] + r);
    }
    return {lo, hi};
}

}  // namespace ctqw

#endif  // CTQW_MODEL_HPP
