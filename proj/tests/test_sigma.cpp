// Slow-growth certificates. Single-mode candidates keep an exactly constant
// norm under the flow (the nonlinearity reduces to a phase), so membership
// verdicts and rejection fractions have closed forms to test against.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "snls/sigma.hpp"

using namespace snls;

namespace {

SpectralField plane_mode(const BasisPtr& basis, int k, double hs_norm, double s) {
    SpectralField u(basis);
    for (std::size_t m = 0; m < basis->size(); ++m) {
        if (basis->modes[m].k[0] == k) {
            double lam = basis->modes[m].lambda;
            u.c[m] = hs_norm / std::pow(1.0 + lam, 0.5 * s);
        }
    }
    return u;
}

}  // namespace

TEST_CASE("the zero state is a member at every level") {
    auto basis = build_basis(1, 8);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    SpectralField zero(basis);
    for (int i : {0, 2}) {
        auto cert = sigma_membership(zero, i, 2, 2.0, gp, io);
        REQUIRE(cert.pass);
        REQUIRE(cert.max_ratio == 0.0);
        REQUIRE(cert.envelope_ratio == 0.0);
        REQUIRE_FALSE(cert.blew_up);
        REQUIRE(cert.T_used.size() == 2);
    }
}

TEST_CASE("oversized data fails immediately at the first check") {
    auto basis = build_basis(1, 8);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    auto u0 = plane_mode(basis, 1, 2.0, 2.0);  // 2.0 > xi(2) = ln 3
    auto cert = sigma_membership(u0, 1, 2, 2.0, gp, io);
    REQUIRE_FALSE(cert.pass);
    REQUIRE_FALSE(cert.blew_up);
    REQUIRE(cert.first_fail.j == 1);
    REQUIRE(cert.first_fail.k == 0);
    REQUIRE(cert.first_fail.t == 0.0);
    REQUIRE(cert.first_fail.bound == Catch::Approx(gp.xi(2.0)));
    REQUIRE(cert.checks == 1);
}

TEST_CASE("check clock follows the local-existence scaling") {
    auto basis = build_basis(1, 8);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    SpectralField zero(basis);
    int i = 1, j_max = 2;
    auto cert = sigma_membership(zero, i, j_max, 2.0, gp, io);
    long expect_checks = 0;
    for (int j = 1; j <= j_max; ++j) {
        double Tj = (1.0 / 128.0) * std::pow(gp.xi(i + j), 1.0 - io.p);
        REQUIRE(cert.T_used[j - 1] == Catch::Approx(Tj));
        expect_checks += static_cast<long>(std::ceil(std::exp(j) / Tj)) + 1;
    }
    REQUIRE(cert.checks == expect_checks);
}

TEST_CASE("membership is monotone in the level index") {
    auto basis = build_basis(1, 2);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    io.dt = 2e-3;
    for (double nrm : {0.5, 1.2, 1.5, 1.65}) {
        auto u0 = plane_mode(basis, 1, nrm, 2.0);
        bool prev = false;
        for (int i : {1, 2, 3, 4}) {
            auto cert = sigma_membership(u0, i, 2, 2.0, gp, io);
            // constant-norm candidate: member iff nrm <= xi(i+1)
            bool expect = nrm <= gp.xi(static_cast<double>(i + 1));
            REQUIRE(cert.pass == expect);
            if (prev) REQUIRE(cert.pass);
            prev = cert.pass;
            if (cert.pass) REQUIRE(cert.envelope_ratio <= 2.0);
        }
    }
}

TEST_CASE("trace membership agrees with exact stepping") {
    auto basis = build_basis(1, 2);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    io.dt = 2e-3;
    for (double nrm : {0.5, 1.2, 1.65}) {
        auto u0 = plane_mode(basis, 1, nrm, 2.0);
        auto tr = sigma_trace(u0, 2, 2.0, io);
        REQUIRE_FALSE(tr.blew_up);
        for (int i : {1, 2, 3, 4}) {
            auto cert = sigma_membership(u0, i, 2, 2.0, gp, io);
            REQUIRE(trace_membership(tr, i, 2, gp, io.p, io.dt) == cert.pass);
        }
    }
}

TEST_CASE("a blown-up flow is reported, not hidden") {
    auto basis = build_basis(1, 2);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    io.blowup_threshold = 0.1;  // below the candidate norm: trips on step one
    auto u0 = plane_mode(basis, 1, 0.5, 2.0);
    auto cert = sigma_membership(u0, 3, 2, 2.0, gp, io);
    REQUIRE_FALSE(cert.pass);
    REQUIRE(cert.blew_up);
    REQUIRE_FALSE(cert.note.empty());
}

TEST_CASE("level bounds are validated") {
    auto basis = build_basis(1, 2);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    SpectralField zero(basis);
    REQUIRE_THROWS_AS(sigma_membership(zero, -1, 2, 2.0, gp, io), ConfigError);
    REQUIRE_THROWS_AS(sigma_membership(zero, 1, 6, 2.0, gp, io), ConfigError);
    REQUIRE_THROWS_AS(sigma_membership(zero, 1, 0, 2.0, gp, io), ConfigError);
}

TEST_CASE("rejection fractions follow the built-in decay of the ensemble") {
    // 400 constant-norm candidates placed between consecutive thresholds:
    //   346 at 0.5, 47 at 1.2, 6 at 1.5, 1 at 1.65
    // gives rejected fractions 0.135, 0.0175, 0.0025, 0 at i = 1..4 exactly,
    // and a log-linear slope of about -2.
    auto basis = build_basis(1, 2);
    GrowthPair gp = GrowthPair::named("log1p");
    IntegrateOptions io;
    io.dt = 2e-3;
    EmpiricalMeasure m;
    m.basis = basis;
    auto add = [&](double nrm, int count) {
        for (int q = 0; q < count; ++q) m.snaps.push_back(plane_mode(basis, 1, nrm, 2.0));
    };
    add(0.5, 346);
    add(1.2, 47);
    add(1.5, 6);
    add(1.65, 1);
    m.weights.assign(m.snaps.size(), 1.0);
    m.normalize();

    auto rep = sigma_ensemble(m, {1, 2, 3, 4}, 2, 2.0, gp, io);
    REQUIRE(rep.rows.size() == 4);
    REQUIRE(rep.rows[0].rejected == 54);
    REQUIRE(rep.rows[1].rejected == 7);
    REQUIRE(rep.rows[2].rejected == 1);
    REQUIRE(rep.rows[3].rejected == 0);
    REQUIRE(rep.fit_points == 3);
    REQUIRE(rep.slope == Catch::Approx(-1.9945).margin(0.01));
    REQUIRE(rep.slope_ok);
    REQUIRE(rep.envelope_ok);
    for (const auto& row : rep.rows) REQUIRE(row.max_envelope_ratio <= 2.0);
    REQUIRE(rep.blowups == 0);

    SECTION("fractions are nonincreasing in the level") {
        for (std::size_t q = 1; q < rep.rows.size(); ++q)
            REQUIRE(rep.rows[q].rejected_fraction <= rep.rows[q - 1].rejected_fraction);
    }
    SECTION("i list must increase") {
        REQUIRE_THROWS_AS(sigma_ensemble(m, {2, 1}, 2, 2.0, gp, io), ConfigError);
        REQUIRE_THROWS_AS(sigma_ensemble(m, {}, 2, 2.0, gp, io), ConfigError);
    }
}

TEST_CASE("sampled reference states are all admitted with envelope margin") {
    auto basis = build_basis(1, 8);
    auto ch = make_channels(basis, NoiseSpec{});
    GrowthPair gp = GrowthPair::named("log1p");
    SdeOptions o;
    SampleParams sp;
    sp.burn_in = 40.0;
    sp.stride = 4.0;
    sp.count = 40;
    sp.seeds = {7};
    auto m = krylov_bogoliubov_sample(basis, o, ch, gp, sp);

    IntegrateOptions io;
    auto rep = sigma_ensemble(m, {1, 2, 3, 4, 5}, 2, 2.0, gp, io);
    for (const auto& row : rep.rows) REQUIRE(row.rejected == 0);
    REQUIRE(rep.slope_ok);  // identically-zero rejection: steeper than any fit
    REQUIRE(rep.fit_points == 0);
    REQUIRE(rep.envelope_ok);
    REQUIRE(rep.blowups == 0);
}
