#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ctqw/states.hpp"

using namespace ctqw;
using Catch::Approx;

TEST_CASE("localized_state", "[states]")
{
    const SiteGrid g(2);
    auto psi = localized_state(g, 0);
    CHECK(psi.amp == std::vector<cplx>{0, 0, 1, 0, 0});
    psi = localized_state(g, -2);
    CHECK(psi.amp == std::vector<cplx>{1, 0, 0, 0, 0});
    CHECK_THROWS_AS(localized_state(g, 3), SiteOutOfGrid);
}

TEST_CASE("gaussian_state", "[states]")
{
    SECTION("neighbour ratio is e^{1/4} for sigma0 = 1")
    {
        const auto psi = gaussian_state(SiteGrid(20), 1.0, 0);
        CHECK(psi.at(0).real() / psi.at(1).real() == Approx(std::exp(0.25)).epsilon(1e-14));
        CHECK(psi.at(0).real() / psi.at(1).real() == Approx(1.28403).epsilon(1e-5));
    }
    SECTION("discrete normalization approaches the continuum constant")
    {
        for (double s0 : {1.0, 2.0, 5.0, 10.0}) {
            const auto psi = gaussian_state(SiteGrid(static_cast<int>(10 * s0) + 10), s0, 0);
            const double cont = std::pow(2.0 * std::numbers::pi * s0 * s0, -0.25);
            CHECK(std::abs(psi.at(0).real() - cont) / cont < 1e-3);
        }
    }
    SECTION("narrow limit is the localized state")
    {
        const SiteGrid g(5);
        const auto psi = gaussian_state(g, 0.01, 1);
        const auto loc = localized_state(g, 1);
        cplx ov{};
        for (std::size_t i = 0; i < g.size(); ++i) ov += std::conj(loc.amp[i]) * psi.amp[i];
        CHECK(std::abs(ov) > 1.0 - 1e-6);
    }
    SECTION("unit norm, real, nonnegative, even about the center")
    {
        for (double s0 : {0.25, 0.5, 1.0, 3.3, 7.0}) {
            const SiteGrid g(static_cast<int>(8 * s0) + 12);
            const auto psi = gaussian_state(g, s0, 3);
            CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
            for (int k = 0; k + 3 <= g.max_site(); ++k) {
                REQUIRE(psi.at(3 + k).imag() == 0.0);
                REQUIRE(psi.at(3 + k).real() >= 0.0);
                if (3 - k >= g.min_site()) REQUIRE(psi.at(3 + k) == psi.at(3 - k));
            }
        }
    }
    SECTION("grid must hold 8 sigma0 of tail")
    {
        CHECK_THROWS_AS(gaussian_state(SiteGrid(79), 10.0, 0), GridTooSmall);
        CHECK_NOTHROW(gaussian_state(SiteGrid(80), 10.0, 0));
        CHECK_THROWS_AS(gaussian_state(SiteGrid(80), 10.0, 1), GridTooSmall);
        CHECK_THROWS_AS(gaussian_state(SiteGrid(10), 1.0, 11), SiteOutOfGrid);
        CHECK_THROWS_AS(gaussian_state(SiteGrid(10), 0.0, 0), InvalidArgument);
    }
}

TEST_CASE("sublattice_flip and reflect", "[states]")
{
    const SiteGrid g(6);
    CHECK(sublattice_flip(localized_state(g, 0)).amp == localized_state(g, 0).amp);
    CHECK(sublattice_flip(localized_state(g, 1)).at(1) == cplx(-1.0, 0.0));
    CHECK(sublattice_flip(localized_state(g, -1)).at(-1) == cplx(-1.0, 0.0));
    CHECK(std::abs(sublattice_flip(gaussian_state(g, 0.7)).norm() - 1.0) < 1e-14);

    const auto gs = gaussian_state(g, 0.7, 0);
    CHECK(reflect(gs).amp == gs.amp);
    CHECK(reflect(localized_state(g, 2)).amp == localized_state(g, -2).amp);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        WaveState psi{g, std::vector<cplx>(g.size())};
        for (auto& a : psi.amp) a = {n01(rng), n01(rng)};
        REQUIRE(reflect(reflect(psi)).amp == psi.amp);
        REQUIRE(sublattice_flip(sublattice_flip(psi)).amp == psi.amp);
    }
}
