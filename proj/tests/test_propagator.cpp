#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ctqw/analytics.hpp"
#include "ctqw/propagator.hpp"

using namespace ctqw;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

namespace {

const PropagatorConfig cheb{};
const PropagatorConfig ref{Engine::reference, 1e-13, std::nullopt};

double max_amp_diff(const WaveState& a, const WaveState& b)
{
    double d = 0;
    for (std::size_t i = 0; i < a.amp.size(); ++i) d = std::max(d, std::abs(a.amp[i] - b.amp[i]));
    return d;
}

WaveState random_state(const SiteGrid& g, std::mt19937_64& rng, int support)
{
    std::normal_distribution<double> n01;
    WaveState psi{g, std::vector<cplx>(g.size())};
    for (int j = -support; j <= support; ++j) psi.amp[g.index(j)] = {n01(rng), n01(rng)};
    const double nrm = psi.norm();
    for (auto& a : psi.amp) a /= nrm;
    return psi;
}

DefectSpec random_defect(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> xi(-2.2, 2.2), th(-2 * pi, 2 * pi);
    return {0, xi(rng), th(rng), th(rng)};
}

double energy(const Hamiltonian& h, const WaveState& psi)
{
    std::vector<cplx> hp(h.size());
    h.apply(psi.amp, hp);
    cplx e{};
    for (std::size_t i = 0; i < hp.size(); ++i) e += std::conj(psi.amp[i]) * hp[i];
    return e.real();
}

}  // namespace

TEST_CASE("evolve: zero duration is the identity", "[propagator]")
{
    const SiteGrid g(20);
    const auto h = build_defective(g, 1.0, 0.0, {0, -1.8, 0.3, 1.1});
    const auto psi = gaussian_state(g, 1.5);
    CHECK(evolve(h, psi, 0.0, cheb).amp == psi.amp);
    CHECK(evolve(h, psi, 0.0, ref).amp == psi.amp);
}

TEST_CASE("evolve: homogeneous walk matches the Bessel oracle", "[propagator]")
{
    const SiteGrid g(60);
    const auto h = build_homogeneous(g, 1.0, 0.0);
    const auto psi = evolve(h, localized_state(g, 0), 10.0, cheb);
    for (int j = g.min_site(); j <= g.max_site(); ++j)
        REQUIRE(std::abs(std::abs(psi.at(j)) - std::abs(special::bessel_j(j, 20.0))) < 1e-10);
    const auto amp = analytics::bessel_oracle_amplitudes(g.half_width(), 10.0);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(psi.amp[i] - amp[i]) < 1e-10);
}

TEST_CASE("evolve: gamma and epsilon scale the oracle", "[propagator]")
{
    const SiteGrid g(80);
    const double gamma = 0.5, eps = 0.8, t = 30.0;
    const auto psi = evolve(build_homogeneous(g, gamma, eps), localized_state(g, 0), t, cheb);
    const auto amp = analytics::bessel_oracle_amplitudes(g.half_width(), t, gamma);
    const cplx phase = std::polar(1.0, -eps * t);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(psi.amp[i] - phase * amp[i]) < 1e-10);
}

TEST_CASE("evolve: xi = 0 traps a walker started on the defect", "[propagator]")
{
    const SiteGrid g(30);
    for (double eps : {0.0, 0.7}) {
        const auto h = build_defective(g, 1.0, eps, {3, 0.0, 1.0, -0.4});
        const auto psi0 = localized_state(g, 3);
        for (double t : {0.5, 7.0, 25.0}) {
            const auto psi = evolve(h, psi0, t, cheb);
            CHECK(std::abs(std::norm(psi.at(3)) - 1.0) < 1e-12);
            CHECK(std::abs(psi.at(3) - std::polar(1.0, -eps * t)) < 1e-12);
        }
    }
}

TEST_CASE("evolve: grid mismatch and convergence failure", "[propagator]")
{
    const auto h = build_homogeneous(SiteGrid(10), 1.0);
    CHECK_THROWS_AS(evolve(h, localized_state(SiteGrid(11), 0), 1.0), GridMismatch);
    PropagatorConfig tight;
    tight.max_terms = 16;
    CHECK_THROWS_AS(evolve(h, localized_state(SiteGrid(10), 0), 40.0, tight), ConvergenceFailure);
    PropagatorConfig bad;
    bad.tolerance = 1e-3;
    CHECK_THROWS_AS(evolve(h, localized_state(SiteGrid(10), 0), 1.0, bad), InvalidArgument);
    CHECK_THROWS_AS(evolve(h, localized_state(SiteGrid(10), 0), -1.0), InvalidArgument);
}

TEST_CASE("default Chebyshev cap always suffices", "[propagator]")
{
    for (double x = 1e-3; x < 6000; x *= 1.37) {
        const std::size_t cap = default_chebyshev_cap(x);
        const auto jk = special::bessel_j_sequence(x, cap);
        INFO("x = " << x);
        REQUIRE(ChebyshevEngine::truncation_order(jk, x, 1e-13) > 0);
    }
}

TEST_CASE("Engine equivalence on random defects", "[propagator][property]")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        const int m = 40 + static_cast<int>(rng() % 80);
        const SiteGrid g(m);
        const auto h = build_defective(g, 1.0, 0.0, random_defect(rng));
        const auto psi0 = random_state(g, rng, 4);
        const double t = std::uniform_real_distribution<double>(1.0, 15.0)(rng);
        const auto a = evolve(h, psi0, t, cheb);
        const auto b = evolve(h, psi0, t, ref);
        REQUIRE(max_amp_diff(a, b) < 1e-9);
        REQUIRE(std::abs(a.norm() - 1.0) < 1e-10);
        REQUIRE(std::abs(b.norm() - 1.0) < 1e-10);
    }
    SECTION("N = 513, gamma t = 50")
    {
        const SiteGrid g(256);
        const auto h = build_defective(g, 1.0, 0.0, {0, -1.8, -1.2 * pi, 1.2 * pi});
        const auto psi0 = gaussian_state(g, 1.0);
        const auto a = evolve(h, psi0, 50.0, cheb);
        const auto b = evolve(h, psi0, 50.0, ref);
        CHECK(max_amp_diff(a, b) < 1e-9);
    }
}

TEST_CASE("Unitarity, energy conservation and composition", "[propagator][property]")
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const SiteGrid g(150);
        const auto h = build_defective(g, 1.0, 0.0, random_defect(rng));
        const auto psi0 = random_state(g, rng, 6);
        const double e0 = energy(h, psi0);
        const double t1 = 3.0 + trial, t2 = 11.0 - 0.5 * trial;
        const auto once = evolve(h, psi0, t1 + t2, cheb);
        const auto twice = evolve(h, evolve(h, psi0, t1, cheb), t2, cheb);
        REQUIRE(max_amp_diff(once, twice) < 1e-10);
        REQUIRE(std::abs(once.norm() - 1.0) < 1e-10);
        REQUIRE(std::abs(energy(h, once) - e0) <= 1e-9 * std::max(1.0, std::abs(e0)));
    }
}

TEST_CASE("Reflection/phase-swap dynamics", "[propagator][property]")
{
    std::mt19937_64 rng(23);
    const SiteGrid g(90);
    for (int trial = 0; trial < 6; ++trial) {
        const auto d = random_defect(rng);
        const auto h = build_defective(g, 1.0, 0.0, d);
        const auto hs = build_defective(g, 1.0, 0.0, {0, d.xi, -d.theta_plus, -d.theta_minus});
        const auto psi0 = gaussian_state(g, 0.5 + trial);
        const double t = 20.0;
        const auto a = position_distribution(evolve(h, psi0, t, cheb));
        const auto b = position_distribution(evolve(hs, psi0, t, cheb));
        for (int j = g.min_site(); j <= g.max_site(); ++j)
            REQUIRE(std::abs(a[g.index(-j)] - b[g.index(j)]) < 1e-10);
    }
    SECTION("opposite phases give a mirror-symmetric distribution")
    {
        const auto h = build_defective(g, 1.0, 0.0, {0, 1.4, -1.5 * pi, 1.5 * pi});
        const auto p = position_distribution(evolve(h, gaussian_state(g, 1.0), 30.0, cheb));
        for (int j = 0; j <= g.max_site(); ++j) REQUIRE(std::abs(p[g.index(j)] - p[g.index(-j)]) < 1e-10);
    }
}

TEST_CASE("Gauge-equivalence dynamics", "[propagator][property]")
{
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> th(-2 * pi, 2 * pi);
    const SiteGrid g(100);
    const auto h0 = build_homogeneous(g, 1.0, 0.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double theta = th(rng);
        const int d = trial - 3;
        const auto hd = build_defective(g, 1.0, 0.0, {d, 1.0, theta, -theta});
        const auto psi0 = random_state(g, rng, 5);
        auto shifted = psi0;
        shifted.amp[g.index(d)] *= std::polar(1.0, theta);
        const auto a = position_distribution(evolve(hd, psi0, 25.0, cheb));
        const auto b = position_distribution(evolve(h0, shifted, 25.0, cheb));
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) < 1e-10);

        const auto la = position_distribution(evolve(hd, localized_state(g, d), 25.0, cheb));
        const auto lb = position_distribution(evolve(h0, localized_state(g, d), 25.0, cheb));
        for (std::size_t i = 0; i < la.size(); ++i) REQUIRE(std::abs(la[i] - lb[i]) < 1e-10);
    }
}

TEST_CASE("Sublattice symmetry of the dynamics", "[propagator][property]")
{
    // S H S = -H  =>  exp(-iHt) S psi = S conj-time evolution; for the
    // distribution: P[S psi](t) under H equals P[psi](t) under -H.
    std::mt19937_64 rng(25);
    const SiteGrid g(80);
    const auto d = random_defect(rng);
    const auto h = build_defective(g, 1.0, 0.0, d);
    Hamiltonian neg = h;
    for (auto& l : neg.lower) l = -l;
    const auto psi0 = random_state(g, rng, 4);
    const auto a = evolve(h, sublattice_flip(psi0), 12.0, cheb);
    const auto b = sublattice_flip(evolve(neg, psi0, 12.0, cheb));
    CHECK(max_amp_diff(a, b) < 1e-10);
}

TEST_CASE("evolve_protocol", "[propagator]")
{
    const SiteGrid g(120);
    const DefectSpec A{0, -1.8, -1.2 * pi, 1.2 * pi};
    const DefectSpec B{0, 1.4, -1.5 * pi, 1.5 * pi};
    const auto psi0 = gaussian_state(g, 1.0);

    SECTION("identical strategies reduce to a static evolution")
    {
        ProtocolSpec p{g, 1.0, 0.0, A, A, 2.3};
        const auto out = evolve_protocol(p, psi0, 30.0, {}, cheb);
        const auto st = evolve(build_defective(g, 1.0, 0.0, A), psi0, 30.0, cheb);
        // each of the 22 segments contributes its own truncation error
        const double segments = std::ceil(30.0 / p.half_period());
        CHECK(max_amp_diff(out.back(), st) < 4 * segments * cheb.tolerance);
    }
    SECTION("shorter than one half-cycle is strategy A alone")
    {
        ProtocolSpec p{g, 1.0, 0.0, A, B, 0.1};
        const auto out = evolve_protocol(p, psi0, 25.0, {}, cheb);
        const auto st = evolve(build_defective(g, 1.0, 0.0, A), psi0, 25.0, cheb);
        CHECK(max_amp_diff(out.back(), st) < 1e-12);
    }
    SECTION("segments alternate A, B, A, ... with a partial tail")
    {
        const double omega = 1.7, h = pi / omega, t_end = 4.5 * h;
        ProtocolSpec p{g, 1.0, 0.0, A, B, omega};
        const auto ha = build_defective(g, 1.0, 0.0, A), hb = build_defective(g, 1.0, 0.0, B);
        auto manual = psi0;
        for (int k = 0; k < 4; ++k) manual = evolve(k % 2 == 0 ? ha : hb, manual, h, ref);
        manual = evolve(ha, manual, 0.5 * h, ref);
        const auto out = evolve_protocol(p, psi0, t_end, {}, cheb);
        CHECK(max_amp_diff(out.back(), manual) < 1e-9);
        CHECK(std::abs(out.back().norm() - 1.0) < 1e-10);

        p.b_first = true;
        auto manual_b = psi0;
        for (int k = 0; k < 4; ++k) manual_b = evolve(k % 2 == 0 ? hb : ha, manual_b, h, ref);
        manual_b = evolve(hb, manual_b, 0.5 * h, ref);
        CHECK(max_amp_diff(evolve_protocol(p, psi0, t_end, {}, cheb).back(), manual_b) < 1e-9);
    }
    SECTION("snapshots split segments without changing the trajectory")
    {
        ProtocolSpec p{g, 1.0, 0.0, A, B, 0.9};
        const std::vector<double> times{0.0, 0.3, 1.0, pi / 0.9, 5.0, 11.1, 20.0};
        const auto snaps = evolve_protocol(p, psi0, 20.0, times, cheb);
        REQUIRE(snaps.size() == times.size());
        CHECK(snaps.front().amp == psi0.amp);
        for (std::size_t i = 1; i < times.size(); ++i) {
            const auto direct = evolve_protocol(p, psi0, times[i], {}, cheb);
            REQUIRE(max_amp_diff(snaps[i], direct.back()) < 1e-10);
            REQUIRE(std::abs(snaps[i].norm() - 1.0) < 1e-10);
        }
    }
    SECTION("preconditions")
    {
        ProtocolSpec p{g, 1.0, 0.0, A, B, 0.0};
        CHECK_THROWS_AS(evolve_protocol(p, psi0, 1.0, {}, cheb), InvalidArgument);
        p.omega = 1.0;
        CHECK_THROWS_AS(evolve_protocol(p, psi0, 1.0, {2.0}, cheb), InvalidArgument);
        p.strategy_b.site = 1;
        CHECK_THROWS_AS(evolve_protocol(p, psi0, 1.0, {}, cheb), InvalidArgument);
    }
}

TEST_CASE("sample_series", "[propagator]")
{
    SECTION("single sample at t = 0")
    {
        const SiteGrid g(30);
        const auto s = sample_series(build_homogeneous(g, 1.0), localized_state(g, 0), {0.0});
        REQUIRE(s.size() == 1);
        CHECK(s.sigma[0] == 0.0);
        CHECK(s.p_defect[0] == 1.0);
        CHECK(s.trapped[0] == 1.0);
        CHECK(s.leakage[0] == 0.0);
    }
    SECTION("localized walk spreads at sqrt(2)")
    {
        const SiteGrid g(264);
        std::vector<double> times;
        for (int k = 1; k <= 10; ++k) times.push_back(10.0 * k);
        const auto s = sample_series(build_homogeneous(g, 1.0), localized_state(g, 0), times);
        CHECK(std::abs(s.sigma.back() / 100.0 - std::sqrt(2.0)) < 1e-3);
    }
    SECTION("incremental evolution equals restarting from t = 0")
    {
        std::mt19937_64 rng(26);
        const SiteGrid g(200);
        const auto h = build_defective(g, 1.0, 0.0, random_defect(rng));
        const auto psi0 = gaussian_state(g, 2.0);
        StaticPropagator prop(h, cheb);
        auto psi = psi0;
        double t = 0;
        for (double target : {0.7, 5.0, 12.5, 40.0, 61.0}) {
            prop.advance(psi, target - t);
            t = target;
            REQUIRE(max_amp_diff(psi, evolve(h, psi0, target, cheb)) < 1e-10);
        }
    }
    SECTION("leakage exceeding the limit fails the run")
    {
        const SiteGrid g(40);
        const auto h = build_homogeneous(g, 1.0);
        SampleOptions opt;
        opt.guard_width = 5;
        CHECK_NOTHROW(sample_series(h, localized_state(g, 0), {10.0}, cheb, opt));
        CHECK_THROWS_AS(sample_series(h, localized_state(g, 0), {10.0, 50.0}, cheb, opt), LatticeTooSmall);
    }
    SECTION("protocol series is unitary across segment boundaries")
    {
        const SiteGrid g(150);
        ProtocolSpec p{g, 1.0, 0.0, {0, -1.0, 1.1 * pi, 1.1 * pi}, {0, 1.4, -1.5 * pi, 1.5 * pi}, 3.0};
        std::vector<double> times;
        for (int k = 0; k <= 40; ++k) times.push_back(1.5 * k);
        SampleOptions opt;
        opt.keep_final_snapshot = true;
        const auto s = sample_series(p, gaussian_state(g, 1.0), times, cheb, opt);
        REQUIRE(s.snapshots.size() == 1);
        double total = 0;
        for (double v : s.snapshots[0].probability) total += v;
        CHECK(std::abs(total - 1.0) < 1e-10);
        CHECK(s.max_norm_drift < 1e-10);
    }
    SECTION("bad schedules")
    {
        const SiteGrid g(10);
        const auto h = build_homogeneous(g, 1.0);
        CHECK_THROWS_AS(sample_series(h, localized_state(g, 0), {}), InvalidArgument);
        CHECK_THROWS_AS(sample_series(h, localized_state(g, 0), {2.0, 1.0}), InvalidArgument);
        CHECK_THROWS_AS(sample_series(h, localized_state(g, 0), {-1.0}), InvalidArgument);
    }
}
