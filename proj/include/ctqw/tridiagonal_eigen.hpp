#ifndef CTQW_TRIDIAGONAL_EIGEN_HPP
#define CTQW_TRIDIAGONAL_EIGEN_HPP

// Symmetric tridiagonal eigensolver: implicit-shift QL iteration with
// eigenvector accumulation (the tql2 scheme).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ctqw/errors.hpp"

namespace ctqw {

struct TridiagonalEigen {
    std::size_t n = 0;
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // row-major: vectors[i * n + k] = component i of vector k

    double component(std::size_t i, std::size_t k) const { return vectors[i * n + k]; }
};

/// diag has length n, offdiag length n-1 (offdiag[i] couples i and i+1).
inline TridiagonalEigen tridiagonal_eigen(std::span<const double> diag,
                                          std::span<const double> offdiag)
{
    const std::size_t n = diag.size();
    if (n == 0 || offdiag.size() + 1 != n)
        throw InvalidArgument("tridiagonal_eigen: band lengths do not match");

    std::vector<double> d(diag.begin(), diag.end());
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = offdiag[i];

    std::vector<double> z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;

    double f = 0.0;
    double tst1 = 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m == n) m = n - 1;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 60)
                    throw ConvergenceFailure("tridiagonal_eigen: QL iteration did not converge");

                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        double* row = &z[k * n];
                        const double t = row[ii + 1];
                        row[ii + 1] = s * row[ii] + c * t;
                        row[ii] = c * row[ii] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // sort ascending
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    TridiagonalEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = d[order[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + k] = z[i * n + order[k]];
    }
    return out;
}

}  // namespace ctqw

#endif  // CTQW_TRIDIAGONAL_EIGEN_HPP
