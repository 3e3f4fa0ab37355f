#ifndef CTQW_SPECIAL_HPP
#define CTQW_SPECIAL_HPP

// The two special functions the simulator needs: erf and integer-order
// Bessel functions of the first kind.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace ctqw::special {

namespace detail {

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!, all terms positive.
inline double erf_series(double x)
{
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

// erfc(x) for x > 0 from the continued fraction
//   sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz method.
inline double erfc_continued_fraction(double x)
{
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace detail

/// Error function, absolute error below 1e-12 on the whole real line.
inline double erf(double x)
{
    if (std::isnan(x)) return x;
    const double ax = std::abs(x);
    const double v = ax <= 3.0 ? detail::erf_series(ax) : 1.0 - detail::erfc_continued_fraction(ax);
    return x < 0.0 ? -v : v;
}

/// J_0(x) .. J_nmax(x) by Miller's downward recurrence, normalized with
/// J_0 + 2 sum_k J_{2k} = 1.
inline std::vector<double> bessel_j_sequence(double x, std::size_t nmax)
{
    std::vector<double> out(nmax + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double ax = std::abs(x);
    std::size_t start = std::max<std::size_t>(nmax, static_cast<std::size_t>(std::ceil(ax))) + 20 +
                        static_cast<std::size_t>(std::ceil(12.0 * std::cbrt(ax)));
    if (start % 2 != 0) ++start;

    constexpr double big = 1e250;
    const double two_over_x = 2.0 / ax;
    double above = 0.0;  // J_{k+1}
    double here = 1.0;    // J_start up to an unknown scale
    double norm = 0.0;
    for (std::size_t k = start; k-- > 0;) {
        // J_k = (2(k+1)/x) J_{k+1} - J_{k+2}
        const double below = (k + 1) * two_over_x * here - above;
        above = here;
        here = below;
        if (k <= nmax) out[k] = here;
        if (k % 2 == 0) norm += (k == 0 ? 1.0 : 2.0) * here;
        if (std::abs(here) > big) {
            here /= big;
            above /= big;
            norm /= big;
            for (std::size_t i = k; i <= nmax && i < out.size(); ++i) out[i] /= big;
        }
    }
    for (auto& v : out) v /= norm;
    if (x < 0.0)
        for (std::size_t k = 1; k <= nmax; k += 2) out[k] = -out[k];
    return out;
}

/// Integer-order J_n(x), any sign of n.
inline double bessel_j(int n, double x)
{
    const std::size_t an = static_cast<std::size_t>(std::abs(n));
    const double v = bessel_j_sequence(x, an)[an];
    return (n < 0 && an % 2 == 1) ? -v : v;
}

}  // namespace ctqw::special

#endif  // CTQW_SPECIAL_HPP
