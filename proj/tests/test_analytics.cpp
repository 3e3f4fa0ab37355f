#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ctqw/analytics.hpp"
#include "ctqw/propagator.hpp"

using namespace ctqw;
using namespace ctqw::analytics;
using Catch::Approx;

TEST_CASE("continuum_sigma", "[analytics]")
{
    CHECK(continuum_sigma({5.0, 1.0}, 0.0) == 5.0);
    CHECK(continuum_sigma({5.0, 1.0}, 5000.0) / 5000.0 == Approx(0.2).epsilon(1e-3));
    CHECK(continuum_sigma({1.0, 2.0}, 1.0) == Approx(std::sqrt(5.0)).epsilon(1e-15));
    for (double s0 : {0.3, 1.0, 7.0})
        for (double t : {0.5, 10.0, 900.0}) {
            const double s = continuum_sigma({s0, 1.3}, t);
            const double v = 1.3 * t / s0;
            REQUIRE((s * s - s0 * s0) == Approx(v * v).epsilon(1e-12));
        }
    CHECK_THROWS_AS(continuum_sigma({0.0, 1.0}, 1.0), InvalidArgument);
}

TEST_CASE("spreading-rate closed forms", "[analytics]")
{
    CHECK(alpha_asymptotic({10.0, 1.0}) == Approx(0.1));
    CHECK(alpha_asymptotic({1.0, 1.0}) == 1.0);
    CHECK(alpha_asymptotic({0.5, 1.0}) == 2.0);

    CHECK(alpha_corrected({1e-6, 1.0}) == Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(alpha_corrected({1e-3, 1.0}) == Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(std::abs(alpha_corrected({10.0, 1.0}) - 0.1) < 1e-10);
    CHECK(std::abs(alpha_corrected({1.0, 1.0}) - std::erf(1.2533141373155002)) < 1e-12);
    CHECK(alpha_corrected({1.0, 1.0}) == Approx(0.9238).margin(1e-3));

    double prev = std::numeric_limits<double>::infinity();
    for (double e = -3.0; e <= 3.0; e += 0.01) {
        const ContinuumParams p{std::pow(10.0, e), 1.0};
        const double ac = alpha_corrected(p);
        REQUIRE(ac <= std::sqrt(2.0) * (1 + 1e-9));
        REQUIRE(ac <= alpha_asymptotic(p) * (1 + 1e-12));
        REQUIRE(ac <= prev * (1 + 1e-14));
        prev = ac;
    }
}

TEST_CASE("bessel_oracle", "[analytics]")
{
    CHECK(bessel_oracle(0, 0.0) == 1.0);
    CHECK(bessel_oracle(4, 0.0) == 0.0);
    for (double t : {1.0, 10.0, 50.0}) {
        const int w = static_cast<int>(std::ceil(2 * t)) + 40;
        double sum = 0, second = 0;
        for (int j = -w; j <= w; ++j) {
            const double p = bessel_oracle(j, t);
            sum += p;
            second += double(j) * j * p;
        }
        CHECK(std::abs(sum - 1.0) < 1e-10);
        if (t == 50.0) CHECK(std::sqrt(second) == Approx(std::sqrt(2.0) * 50.0).epsilon(1e-6));
    }
}

TEST_CASE("bessel_oracle matches the reference engine", "[analytics]")
{
    const SiteGrid g(160);
    const auto h = build_homogeneous(g, 1.0, 0.0);
    const auto psi0 = localized_state(g, 0);
    PropagatorConfig ref;
    ref.engine = Engine::reference;
    StaticPropagator prop(h, ref);
    for (double t : {1.0, 10.0, 50.0}) {
        auto psi = psi0;
        prop.advance(psi, t);
        const auto amp = bessel_oracle_amplitudes(g.half_width(), t);
        double worst = 0, worst_amp = 0;
        for (int j = g.min_site(); j <= g.max_site(); ++j) {
            worst = std::max(worst, std::abs(std::norm(psi.at(j)) - bessel_oracle(j, t)));
            worst_amp = std::max(worst_amp, std::abs(psi.at(j) - amp[g.index(j)]));
        }
        CHECK(worst < 1e-10);
        CHECK(worst_amp < 1e-10);
    }
}
