#ifndef CTQW_ANALYTICS_HPP
#define CTQW_ANALYTICS_HPP

// Closed forms for free Gaussian packets and the homogeneous walk, used as
// references for the lattice simulations.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/special.hpp"

namespace ctqw::analytics {

struct ContinuumParams {
    double sigma0 = 1.0;
    double gamma = 1.0;  // plays the role of 1/(2m)

    void validate() const
    {
        if (!(sigma0 > 0.0) || !(gamma > 0.0))
            throw InvalidArgument("ContinuumParams: sigma0 and gamma must be positive");
    }
};

inline double erf(double x) { return special::erf(x); }

/// Width of a free Gaussian packet: sqrt(sigma0^2 + gamma^2 t^2 / sigma0^2).
inline double continuum_sigma(const ContinuumParams& p, double t)
{
    p.validate();
    if (t < 0.0) throw InvalidArgument("continuum_sigma: t must be nonnegative");
    const double v = p.gamma * t / p.sigma0;
    return std::sqrt(p.sigma0 * p.sigma0 + v * v);
}

inline double alpha_asymptotic(const ContinuumParams& p)
{
    p.validate();
    return p.gamma / p.sigma0;
}

/// (gamma/sigma0) * erf(sqrt(pi/2) sigma0); tends to sqrt(2) gamma as sigma0 -> 0.
inline double alpha_corrected(const ContinuumParams& p)
{
    p.validate();
    const double z = std::sqrt(std::numbers::pi / 2.0) * p.sigma0;
    if (z < 1e-4) {
        // erf(z)/z = 2/sqrt(pi) (1 - z^2/3 + z^4/10)
        const double z2 = z * z;
        return p.gamma * std::sqrt(std::numbers::pi / 2.0) * 2.0 / std::sqrt(std::numbers::pi) *
               (1.0 - z2 / 3.0 + z2 * z2 / 10.0);
    }
    return p.gamma / p.sigma0 * erf(z);
}

/// P_j(t) = J_j(2 gamma t)^2 for the homogeneous walk started at |0> with epsilon = 0.
inline double bessel_oracle(int j, double t, double gamma = 1.0)
{
    const double v = special::bessel_j(j, 2.0 * gamma * t);
    return v * v;
}

/// Amplitudes <j|psi(t)> of the same walk for |j| <= jmax: i^j J_j(2 gamma t).
/// The homogeneous chain has hopping -gamma, so exp(-iHt)|0> = sum_j i^j J_j(2 gamma t)|j>.
inline std::vector<std::complex<double>> bessel_oracle_amplitudes(int jmax, double t,
                                                                  double gamma = 1.0)
{
    const auto jn = special::bessel_j_sequence(2.0 * gamma * t, static_cast<std::size_t>(jmax));
    std::vector<std::complex<double>> out(2 * static_cast<std::size_t>(jmax) + 1);
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int j = -jmax; j <= jmax; ++j) {
        const std::size_t aj = static_cast<std::size_t>(std::abs(j));
        // J_{-n} = (-1)^n J_n, i^{-n} = (-i)^n  =>  i^{-n} J_{-n} = i^n J_n
        out[static_cast<std::size_t>(j + jmax)] = ipow[aj % 4] * jn[aj];
    }
    return out;
}

}  // namespace ctqw::analytics

#endif  // CTQW_ANALYTICS_HPP
