// Spectral fields and the collocation grid: Parseval, closed-form norms,
// refined-grid oracles for the pointwise nonlinearity.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "snls/field.hpp"
#include "snls/grid.hpp"

using namespace snls;

namespace {
const double INF = std::numeric_limits<double>::infinity();

SpectralField smooth_random(const BasisPtr& b, double decay, double amp, std::uint64_t stream) {
    RngStream rng(2024, stream);
    auto u = random_field(b, decay, rng);
    u *= cplx(amp, 0.0);
    return u;
}
}  // namespace

TEST_CASE("grid round trip is the identity on the band") {
    for (int d : {1, 2, 3}) {
        auto b = build_basis(d, d == 3 ? 20 : 12);
        CollocationGrid grid(b);
        auto u = smooth_random(b, 1.0, 1.0, 10 + d);
        auto v = grid.from_grid(grid.to_grid(u));
        double scale = l2_norm(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            REQUIRE(std::abs(u.c[i] - v.c[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("Parseval: grid quadrature of |u|^2 equals coefficient sum") {
    auto b = build_basis(2, 15);
    CollocationGrid grid(b);
    auto u = smooth_random(b, 0.5, 2.0, 3);
    double viaGrid = grid.lp_pow(u, 2.0);
    REQUIRE(viaGrid == Catch::Approx(l2_norm_sq(u)).epsilon(1e-12));
}

TEST_CASE("sobolev norm closed forms") {
    auto b = build_basis(1, 4);
    SpectralField u(b);
    u.c[1] = 1.0;  // a lambda=1 mode
    REQUIRE(sobolev_norm(u, 2.0) == Catch::Approx(2.0).epsilon(1e-14));
    REQUIRE(sobolev_norm(u, 0.0) == Catch::Approx(1.0).epsilon(1e-14));

    // embedding: ||u||_s <= ||u||_r for s <= r
    auto w = smooth_random(b, 0.3, 1.0, 4);
    for (double s = -1.0; s <= 2.0; s += 0.5)
        REQUIRE(sobolev_norm(w, s) <= sobolev_norm(w, s + 0.7) * (1 + 1e-14));
}

TEST_CASE("real inner product: (u,iu)=0 and (u,u)=||u||^2") {
    auto b = build_basis(3, 10);
    auto u = smooth_random(b, 0.2, 1.5, 5);
    auto iu = cplx(0.0, 1.0) * u;
    REQUIRE(std::abs(inner(u, iu)) <= 1e-13 * l2_norm_sq(u));
    REQUIRE(inner(u, u) == Catch::Approx(l2_norm_sq(u)).epsilon(1e-13));
}

TEST_CASE("mass of the constant field is (2 pi)^d / 2") {
    for (int d : {1, 2, 3}) {
        auto b = build_basis(d, 2);
        SpectralField u(b);
        u.c[0] = std::pow(TWO_PI, 0.5 * d);  // u(x) = 1
        REQUIRE(mass(u) == Catch::Approx(0.5 * std::pow(TWO_PI, d)).epsilon(1e-13));
        CollocationGrid grid(b);
        auto g = grid.to_grid(u);
        for (auto& v : g) REQUIRE(std::abs(v - cplx(1.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("energy closed form on a constant field") {
    const double p = 7.0, c = 0.8;
    for (int d : {1, 2}) {
        auto b = build_basis(d, 2);
        CollocationGrid grid(b);
        SpectralField u(b);
        u.c[0] = c * std::pow(TWO_PI, 0.5 * d);
        double vol = std::pow(TWO_PI, d);
        double expect = vol * (0.5 * c * c + std::pow(c, p + 1.0) / (p + 1.0));
        REQUIRE(grid.energy(u, p) == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("L^q closed form on a single plane wave") {
    auto b = build_basis(1, 6);
    CollocationGrid grid(b);
    SpectralField u(b);
    const cplx a{0.7, -0.2};
    u.c[4] = a;  // some k=2 mode
    double amp = std::abs(a) * std::pow(TWO_PI, -0.5);
    for (double q : {2.0, 4.0, 8.0}) {
        double expect = TWO_PI * std::pow(amp, q);
        REQUIRE(grid.lp_pow(u, q) == Catch::Approx(expect).epsilon(1e-12));
    }
    REQUIRE(grid.lp_norm(u, INF) == Catch::Approx(amp).epsilon(1e-12));
}

TEST_CASE("cubic nonlinearity of a plane wave has the closed-form coefficient") {
    auto b = build_basis(1, 6);
    CollocationGrid grid(b, 4);
    SpectralField u(b);
    const cplx a{0.3, 0.4};
    u.c[3] = a;  // k = -2
    auto out = grid.nonlinearity(u, 3.0);
    // |u|^2 u = |a|^2 a (2pi)^-1 e_k for a single mode
    cplx expect = std::norm(a) * a / TWO_PI;
    REQUIRE(std::abs(out.c[3] - expect) < 1e-13);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (i != 3) REQUIRE(std::abs(out.c[i]) < 1e-13);
}

TEST_CASE("collocation nonlinearity agrees with a refined-grid oracle") {
    auto b = build_basis(1, 16);
    auto u = smooth_random(b, 3.0, 0.1, 6);
    CollocationGrid coarse(b, 2), fine(b, 8);
    for (double p : {3.0, 7.0}) {
        auto a = coarse.nonlinearity(u, p);
        auto o = fine.nonlinearity(u, p);
        double scale = l2_norm(o);
        double err = l2_norm(a - o);
        REQUIRE(err <= 1e-10 * scale);
    }
}

TEST_CASE("fractional p falls back to pow and stays finite") {
    auto b = build_basis(1, 8);
    CollocationGrid grid(b);
    auto u = smooth_random(b, 2.0, 0.5, 7);
    auto out = grid.nonlinearity(u, 2.5);
    REQUIRE(std::isfinite(l2_norm(out)));
    // |u|^{1.5} u of the zero field is zero
    SpectralField z(b);
    REQUIRE(l2_norm(grid.nonlinearity(z, 2.5)) == 0.0);
}

TEST_CASE("linear propagator is an isometry with per-mode phase") {
    auto b = build_basis(2, 12);
    auto u = smooth_random(b, 0.5, 1.0, 8);
    double t = 0.37;
    auto v = linear_propagator(u, t);
    for (double sig : {0.0, 1.0, 2.0})
        REQUIRE(sobolev_norm(v, sig) == Catch::Approx(sobolev_norm(u, sig)).epsilon(1e-12));
    for (std::size_t m = 0; m < u.size(); ++m) {
        cplx expect = u.c[m] * std::exp(cplx(0.0, -t * (1.0 + b->lambda(m))));
        REQUIRE(std::abs(v.c[m] - expect) < 1e-14 * (1.0 + std::abs(u.c[m])));
    }
    // group property
    auto w1 = linear_propagator(v, 0.63);
    auto w2 = linear_propagator(u, 1.0);
    REQUIRE(l2_norm(w1 - w2) < 1e-12 * l2_norm(u));
}

TEST_CASE("projection keeps whole shells and is idempotent") {
    auto b = build_basis(1, 9);
    SpectralField u(b);
    for (auto& v : u.c) v = 1.0;
    auto pu = project(u, 1);
    REQUIRE(pu.c[0] == cplx(1.0, 0.0));
    REQUIRE(pu.c[1] == cplx(1.0, 0.0));
    REQUIRE(pu.c[2] == cplx(1.0, 0.0));
    for (std::size_t i = 3; i < pu.size(); ++i) REQUIRE(pu.c[i] == cplx(0.0, 0.0));
    auto ppu = project(pu, 1);
    for (std::size_t i = 0; i < pu.size(); ++i) REQUIRE(ppu.c[i] == pu.c[i]);
    // Parseval: projection never grows any Sobolev norm
    auto w = smooth_random(b, 0.1, 1.0, 9);
    REQUIRE(sobolev_norm(project(w, 3), 1.3) <= sobolev_norm(w, 1.3));
}

TEST_CASE("gauge transform round-trips and preserves moduli") {
    auto b = build_basis(1, 8);
    auto u = smooth_random(b, 1.0, 1.0, 11);
    auto v = gauge_transform(u, 2.1, true);
    for (std::size_t i = 0; i < u.size(); ++i)
        REQUIRE(std::abs(std::abs(v.c[i]) - std::abs(u.c[i])) < 1e-14);
    auto back = gauge_transform(v, 2.1, false);
    REQUIRE(l2_norm(back - u) < 1e-13 * l2_norm(u));
}

TEST_CASE("critical exponent") {
    REQUIRE(critical_exponent(7, 3) == Catch::Approx(7.0 / 6.0));
    REQUIRE(critical_exponent(3, 1) == Catch::Approx(-0.5));
    REQUIRE(critical_exponent(5, 3) == Catch::Approx(1.0));  // H^1-critical borderline
    REQUIRE(critical_exponent(7, 3) > 1.0);  // energy-supercritical regime
    REQUIRE_THROWS_AS(critical_exponent(1.0, 2), Error);
    REQUIRE_THROWS_AS(critical_exponent(0.5, 2), Error);
}

TEST_CASE("rebase matches modes across cutoffs") {
    auto small = build_basis(1, 8);
    auto big = build_basis(1, 16);
    auto u = smooth_random(small, 0.5, 1.0, 12);
    auto e = rebase(u, big);
    REQUIRE(l2_norm(e) == Catch::Approx(l2_norm(u)).epsilon(1e-14));
    auto back = rebase(e, small);
    REQUIRE(l2_norm(back - u) == 0.0);
}
