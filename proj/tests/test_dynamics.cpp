// Deterministic integrators against closed forms: the plane-wave solution
// (two independent schemes must converge to it), gauge covariance as an exact
// algebraic identity of the splitting, scheme order, the Picard solver, and
// the Galerkin truncation study.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "snls/dynamics.hpp"

using namespace snls;

namespace {

double rel_l2(const SpectralField& a, const SpectralField& b) {
    return l2_norm(a - b) / l2_norm(b);
}

}  // namespace

TEST_CASE("plane wave evolves with omega = c0 + |k|^2 + |c|^(p-1)") {
    auto basis = build_basis(1, 8);
    double c = 0.5, p = 7.0;
    std::array<int, 3> k{2, 0, 0};
    auto u0 = plane_wave(basis, c, k, 0.0, p);
    auto exact = plane_wave(basis, c, k, 1.0, p);

    REQUIRE(plane_wave_omega(c, 4.0, p) == Catch::Approx(5.015625).epsilon(1e-15));

    IntegrateOptions opt;
    opt.p = p;
    opt.dt = 1e-4;

    SECTION("strang splitting is exact on plane waves") {
        // both substeps act as global phases here, so only roundoff remains
        auto out = integrate_deterministic(u0, 1.0, opt);
        REQUIRE(rel_l2(out, exact) < 2e-12);
    }
    SECTION("exponential integrator converges to the same closed form") {
        opt.scheme = "exp-rk";
        auto out = integrate_deterministic(u0, 1.0, opt);
        REQUIRE(rel_l2(out, exact) < 1e-6);
    }
    SECTION("amplitude dependence of the frequency") {
        // c = 1: omega = 1 + 4 + 1 = 6, a genuinely different phase speed
        auto v0 = plane_wave(basis, 1.0, k, 0.0, p);
        auto vT = integrate_deterministic(v0, 0.5, opt);
        auto vexact = plane_wave(basis, 1.0, k, 0.5, p);
        REQUIRE(rel_l2(vT, vexact) < 2e-12);
    }
}

TEST_CASE("gauge change is an exact symmetry of the discrete flow") {
    // step_gauged = e^{-i dt} step_ungauged: the rotation substep commutes
    // with global phases and the linear phases differ by exactly e^{-i dt}
    auto basis = build_basis(1, 8);
    RngStream rng(77, 0);
    auto u0 = random_field(basis, 2.5, rng, 1.0, 2.0);

    IntegrateOptions gauged;
    gauged.dt = 1e-3;
    IntegrateOptions ungauged = gauged;
    ungauged.c0 = 0.0;

    double T = 0.1;
    auto v = integrate_deterministic(u0, T, gauged);
    auto u = integrate_deterministic(u0, T, ungauged);
    REQUIRE(rel_l2(gauge_transform(u, T, true), v) < 1e-12);
    REQUIRE(rel_l2(gauge_transform(v, T, false), u) < 1e-12);
}

TEST_CASE("mass is conserved up to roundoff by the splitting") {
    auto basis = build_basis(1, 32);
    RngStream rng(5, 1);
    auto u0 = random_field(basis, 2.51, rng, 1.0, 2.0);
    double m0 = mass(u0);

    IntegrateOptions opt;
    opt.dt = 1e-3;
    double worst = 0.0;
    integrate_deterministic(u0, 0.5, opt, [&](double, const SpectralField& u) {
        worst = std::max(worst, std::abs(mass(u) - m0) / m0);
    });
    REQUIRE(worst < 1e-10);
}

TEST_CASE("energy drift stays second order small") {
    auto basis = build_basis(1, 16);
    RngStream rng(6, 2);
    auto u0 = random_field(basis, 2.51, rng, 1.0, 2.0);
    CollocationGrid grid(basis);
    double e0 = grid.energy(u0, 7.0);

    auto drift = [&](double dt, const std::string& scheme) {
        IntegrateOptions opt;
        opt.dt = dt;
        opt.scheme = scheme;
        double worst = 0.0;
        integrate_deterministic(u0, 0.25, opt, [&](double, const SpectralField& u) {
            worst = std::max(worst, std::abs(grid.energy(u, 7.0) - e0) / e0);
        });
        return worst;
    };
    double d1 = drift(1e-3, "strang");
    double d2 = drift(5e-4, "strang");
    REQUIRE(d1 < 1e-4);
    REQUIRE(d2 < d1);  // refining dt shrinks the drift
}

TEST_CASE("both schemes are second order on a generic field") {
    auto basis = build_basis(1, 16);
    RngStream rng(9, 3);
    auto u0 = random_field(basis, 2.51, rng, 1.0, 2.0);
    double T = 0.1;

    IntegrateOptions ref_opt;
    ref_opt.dt = 2e-6;
    auto ref = integrate_deterministic(u0, T, ref_opt);

    for (const std::string scheme : {"strang", "exp-rk"}) {
        IntegrateOptions opt;
        opt.scheme = scheme;
        opt.dt = 1e-3;
        double e1 = l2_norm(integrate_deterministic(u0, T, opt) - ref);
        opt.dt = 5e-4;
        double e2 = l2_norm(integrate_deterministic(u0, T, opt) - ref);
        INFO(scheme << ": e(dt)=" << e1 << " e(dt/2)=" << e2 << " ratio=" << e1 / e2);
        REQUIRE(e1 / e2 > 3.2);
        REQUIRE(e1 / e2 < 4.8);
    }
}

TEST_CASE("picard iteration contracts on the certified window") {
    auto basis = build_basis(1, 16);
    RngStream rng(11, 4);
    double s = 2.0, p = 7.0;
    auto u0 = random_field(basis, 2.51, rng, 1.0, s);
    REQUIRE(sobolev_norm(u0, s) == Catch::Approx(1.0));

    double T = local_existence_time(1.0, p);
    REQUIRE(T == Catch::Approx(1.0 / 128.0));

    auto res = picard_local_solve(u0, p, s, T);
    REQUIRE(res.converged);
    REQUIRE(res.certificate);
    REQUIRE(res.sup_norm <= 2.0 * res.initial_norm * (1 + 1e-12));
    REQUIRE(!res.contraction.empty());
    for (double f : res.contraction) REQUIRE(f <= 0.5);

    // the fixed point must agree with the time stepper
    IntegrateOptions opt;
    opt.p = p;
    opt.dt = 1e-5;
    auto ref = integrate_deterministic(u0, T, opt);
    REQUIRE(l2_norm(res.solution.back() - ref) < 1e-6);

    SECTION("window validation") {
        REQUIRE_THROWS_AS(picard_local_solve(u0, p, s, 1.5 * T), Error);
        REQUIRE_THROWS_AS(picard_local_solve(u0, p, s, T, 2), Error);
        REQUIRE_THROWS_AS(local_existence_time(0.0, p), Error);
        REQUIRE_THROWS_AS(local_existence_time(1.0, 1.0), Error);
    }
}

TEST_CASE("truncation error decays at the Sobolev-gap rate") {
    auto basis = build_basis(1, 64);
    RngStream rng(13, 5);
    double s = 2.0, r = 1.0;
    auto u0 = random_field(basis, s + 0.51, rng, 1.0, s);

    auto study = galerkin_convergence_study(u0, 7.0, s, r, {8, 16, 32, 64},
                                            1.0 / 128.0, 1e-4);
    REQUIRE(study.rows.size() == 3);
    REQUIRE(study.ref_N == 64);
    REQUIRE(study.rows[0].error > study.rows[1].error);
    REQUIRE(study.rows[1].error > study.rows[2].error);
    REQUIRE(study.expected == Catch::Approx(-0.5));
    INFO("slope = " << study.slope);
    REQUIRE(std::abs(study.slope - study.expected) < 0.125);
}

TEST_CASE("trajectory diagnostics") {
    SECTION("sup-norm integral is the trapezoid rule") {
        std::vector<double> t{0.0, 0.5, 1.0}, v{2.0, 2.0, 2.0};
        REQUIRE(linfty_integral(t, v) == Catch::Approx(2.0));
        std::vector<double> w{0.0, 1.0, 2.0};
        REQUIRE(linfty_integral(t, w) == Catch::Approx(1.0));
        REQUIRE_THROWS_AS(linfty_integral(t, std::vector<double>{1.0}), Error);
    }
    SECTION("growth envelope ratio") {
        GrowthPair id = GrowthPair::named("identity");
        std::vector<double> t{0.0, 1.0, 3.0}, n{3.0, 3.0, 3.0};
        auto rep = growth_tracker(t, n, id, 2.0);
        // envelope 1 + i + ln(1+t) is smallest at t = 0
        REQUIRE(rep.sup_ratio == Catch::Approx(1.0));
        REQUIRE(rep.argmax_t == 0.0);
        REQUIRE(rep.within_envelope);
    }
}

TEST_CASE("blow-up detection") {
    auto basis = build_basis(1, 8);
    RngStream rng(3, 6);
    auto u0 = random_field(basis, 2.5, rng, 1.0, 2.0);

    IntegrateOptions opt;
    opt.dt = 1e-3;
    SECTION("norm threshold") {
        opt.blowup_threshold = 1e-12;
        try {
            integrate_deterministic(u0, 1.0, opt);
            FAIL("expected blow-up");
        } catch (const BlowupError& e) {
            REQUIRE(e.time > 0.0);
            REQUIRE(e.norm > 1e-12);
        }
    }
    SECTION("non-finite values") {
        auto bad = u0;
        bad.c[0] = cplx(std::nan(""), 0.0);
        REQUIRE_THROWS_AS(integrate_deterministic(bad, 1.0, opt), BlowupError);
    }
    SECTION("zero-length integration returns the state") {
        auto out = integrate_deterministic(u0, 0.0, opt);
        REQUIRE(rel_l2(out, u0) == 0.0);
    }
    SECTION("bad arguments") {
        opt.dt = -1.0;
        REQUIRE_THROWS_AS(integrate_deterministic(u0, 1.0, opt), ConfigError);
        IntegrateOptions bad_scheme;
        bad_scheme.scheme = "leapfrog";
        REQUIRE_THROWS_AS(integrate_deterministic(u0, 0.1, bad_scheme), ConfigError);
    }
}
