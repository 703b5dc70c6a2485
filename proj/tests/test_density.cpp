// Distributional analysis: histograms with atom detection, quadratic
// variations against finite-difference oracles, the resolvent ODE residual,
// the generator stationarity surrogate, and small-ball envelopes.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "snls/density.hpp"

using namespace snls;

namespace {

// single-mode field on the zero wavenumber with prescribed L2 norm
SpectralField norm_field(const BasisPtr& basis, double nrm) {
    SpectralField u(basis);
    for (std::size_t m = 0; m < basis->size(); ++m)
        if (basis->modes[m].lambda == 0.0) u.c[m] = nrm;
    return u;
}

EmpiricalMeasure from_snaps(const BasisPtr& basis, std::vector<SpectralField> snaps,
                            std::vector<double> weights = {}) {
    EmpiricalMeasure m;
    m.basis = basis;
    m.snaps = std::move(snaps);
    m.weights = weights.empty() ? std::vector<double>(m.snaps.size(), 1.0) : std::move(weights);
    m.normalize();
    return m;
}

}  // namespace

TEST_CASE("a point mass shows up as a unit atom at zero") {
    auto basis = build_basis(1, 8);
    auto m = from_snaps(basis, std::vector<SpectralField>(10, SpectralField(basis)));
    auto d = mass_distribution(m, 8);
    REQUIRE(d.atoms.size() == 1);
    REQUIRE(d.atoms[0].value == 0.0);
    REQUIRE(d.atoms[0].mass == Catch::Approx(1.0));
    REQUIRE(d.atom_at_zero());
    REQUIRE(d.total_mass() == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t b = 1; b < d.edges.size(); ++b) REQUIRE(d.edges[b] > d.edges[b - 1]);
    REQUIRE(d.bandwidth == 0.0);  // degenerate spread
    REQUIRE_THROWS_AS(d.kde(0.0), Error);
}

TEST_CASE("weighted histogram and atom masses are exact on hand data") {
    auto basis = build_basis(1, 8);
    // mass values 0.5, 0.5, 2.0 with weights 4, 3.5, 2.5 (normalized .4/.35/.25)
    auto m = from_snaps(basis,
                        {norm_field(basis, std::sqrt(1.0)), norm_field(basis, std::sqrt(1.0)),
                         norm_field(basis, 2.0)},
                        {4.0, 3.5, 2.5});
    auto d = mass_distribution(m, 3);
    REQUIRE(d.values[0] == Catch::Approx(0.5));
    REQUIRE(d.values[2] == Catch::Approx(2.0));
    REQUIRE(d.masses.size() == 3);
    REQUIRE(d.masses[0] == Catch::Approx(0.75));
    REQUIRE(d.masses[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(d.masses[2] == Catch::Approx(0.25));
    REQUIRE(d.atoms.size() == 1);
    REQUIRE(d.atoms[0].value == Catch::Approx(0.5));
    REQUIRE(d.atoms[0].mass == Catch::Approx(0.75));
    REQUIRE_FALSE(d.atom_at_zero());
}

TEST_CASE("sampled distributions refine cleanly and stay atom-free") {
    auto basis = build_basis(1, 8);
    auto ch = make_channels(basis, NoiseSpec{});
    GrowthPair gp = GrowthPair::named("log1p");
    SdeOptions o;
    SampleParams sp;
    sp.burn_in = 30.0;
    sp.stride = 3.0;
    sp.count = 80;
    sp.seeds = {3};
    auto m = krylov_bogoliubov_sample(basis, o, ch, gp, sp);

    auto base = mass_distribution(m, 16);
    auto fine = mass_distribution(m, 32);
    REQUIRE(base.atoms.empty());
    REQUIRE(base.total_mass() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(fine.total_mass() == Catch::Approx(1.0).margin(1e-12));

    SECTION("max density away from zero is stable under bin refinement") {
        double a = 0.02;
        double db = base.max_density_outside(a);
        double df = fine.max_density_outside(a);
        REQUIRE(db > 0.0);
        REQUIRE(df > 0.0);
        REQUIRE(df / db < 2.5);
        REQUIRE(db / df < 2.5);
    }
    SECTION("kernel density bounds are robust to bandwidth halving/doubling") {
        REQUIRE(base.bandwidth > 0.0);
        double x = base.values[10];
        double mid = base.kde(x), lo = base.kde(x, 0.5), hi = base.kde(x, 2.0);
        REQUIRE(mid > 0.0);
        REQUIRE(lo / mid < 4.0);
        REQUIRE(mid / lo < 4.0);
        REQUIRE(hi / mid < 4.0);
        REQUIRE(mid / hi < 4.0);
    }
    SECTION("energy law comes out normalized and positive") {
        auto de = energy_distribution(m, o.p);
        REQUIRE(de.total_mass() == Catch::Approx(1.0).margin(1e-12));
        for (double v : de.values) REQUIRE(v > 0.0);
    }
}

TEST_CASE("restricting away from the origin removes the zero atom") {
    auto basis = build_basis(1, 8);
    std::vector<SpectralField> snaps;
    for (int i = 0; i < 30; ++i) snaps.emplace_back(basis);  // zero states
    for (int i = 0; i < 70; ++i) snaps.push_back(norm_field(basis, (i + 0.5) / 70.0));
    auto m = from_snaps(basis, std::move(snaps));
    REQUIRE(mass_distribution(m).atom_at_zero());
    auto r = restrict_measure(m, [](const SpectralField& u) { return l2_norm(u) > 0.05; });
    auto d = mass_distribution(r);
    REQUIRE(d.atoms.empty());
    REQUIRE(d.total_mass() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("quadratic variations match closed forms and derivatives") {
    auto basis = build_basis(1, 8);
    auto ch = make_channels(basis, NoiseSpec{});
    SdeOptions o;
    CollocationGrid grid(basis, o.oversample);

    SECTION("zero state has zero variation") {
        SpectralField z(basis);
        REQUIRE(quadratic_variation_mass(z, ch) == 0.0);
        REQUIRE(quadratic_variation_energy(z, ch, grid, o.p) == 0.0);
    }
    SECTION("single-mode mass variation is a_m^2 |c|^2") {
        for (std::size_t m = 0; m < basis->size(); m += 5) {
            SpectralField u(basis);
            u.c[m] = cplx{0.3, -0.4};
            REQUIRE(quadratic_variation_mass(u, ch) ==
                    Catch::Approx(sq(ch.a[m]) * 0.25).epsilon(1e-14));
        }
    }
    SECTION("energy gradient components agree with finite differences") {
        RngStream rng(51, 0);
        auto u = random_field(basis, 1.2, rng, 0.8, 2.0);
        SpectralField nl = grid.nonlinearity(u, o.p);
        double h = 1e-5;
        for (bool with_mass : {true, false}) {
            auto functional = [&](const SpectralField& w) {
                return grid.energy(w, o.p) - (with_mass ? 0.0 : mass(w));
            };
            for (std::size_t m : {std::size_t{0}, std::size_t{3}, basis->size() - 1}) {
                double lam = basis->modes[m].lambda + (with_mass ? 1.0 : 0.0);
                cplx w_m = lam * u.c[m] + nl.c[m];
                for (int channel = 0; channel < 2; ++channel) {
                    SpectralField dir(basis);
                    dir.c[m] = channel == 0 ? cplx{1.0, 0.0} : cplx{0.0, 1.0};
                    SpectralField up = u, dn = u;
                    axpy(cplx{h, 0.0}, dir, up);
                    axpy(cplx{-h, 0.0}, dir, dn);
                    double fd = (functional(up) - functional(dn)) / (2.0 * h);
                    double closed = channel == 0 ? w_m.real() : w_m.imag();
                    REQUIRE(fd == Catch::Approx(closed).margin(1e-6 * (1.0 + std::abs(closed))));
                }
            }
        }
    }
    SECTION("mass variation dominates the smallest channel") {
        RngStream rng(52, 0);
        auto u = random_field(basis, 1.0, rng, 0.7, 2.0);
        double amin = INFINITY;
        for (double a : ch.a) amin = std::min(amin, a * a);
        double qm = quadratic_variation_mass(u, ch);
        REQUIRE(qm > 0.0);
        REQUIRE(qm >= amin * l2_norm_sq(u) * (1.0 - 1e-12));
        REQUIRE(quadratic_variation_energy(u, ch, grid, o.p) > 0.0);
    }
    SECTION("conjugate-wavenumber relabeling leaves both variations alone") {
        RngStream rng(53, 0);
        auto u = random_field(basis, 1.0, rng, 0.7, 2.0);
        SpectralField v(basis);
        for (std::size_t m = 0; m < basis->size(); ++m) {
            int k = basis->modes[m].k[0];
            for (std::size_t mm = 0; mm < basis->size(); ++mm)
                if (basis->modes[mm].k[0] == -k) v.c[mm] = u.c[m];
        }
        REQUIRE(quadratic_variation_mass(v, ch) ==
                Catch::Approx(quadratic_variation_mass(u, ch)).epsilon(1e-13));
        REQUIRE(quadratic_variation_energy(v, ch, grid, o.p) ==
                Catch::Approx(quadratic_variation_energy(u, ch, grid, o.p)).epsilon(1e-10));
    }
}

TEST_CASE("resolvent function solves its second-order equation") {
    auto g = sample_bump(0.0, 1.0, 0.5, 2001);
    std::vector<double> xs;
    for (int i = 0; i <= 40; ++i) xs.push_back(-2.0 + 0.1 * i);

    SECTION("zero input gives the zero function") {
        SampledBump z = g;
        for (double& v : z.v) v = 0.0;
        auto phi = resolvent_phi(z, 1.0);
        for (double x : {-1.0, 0.0, 0.7}) REQUIRE(phi.value(x) == 0.0);
    }
    SECTION("residual meets tolerance across three decades of lambda") {
        for (double lam : {0.1, 1.0, 10.0}) {
            auto phi = resolvent_phi(g, lam);
            auto rep = resolvent_residual(phi, xs);
            INFO("lambda=" << lam << " residual=" << rep.residual);
            REQUIRE(rep.pass);
            REQUIRE(rep.residual <= 1e-6);
        }
    }
    SECTION("a coarse sample grid fails the residual check honestly") {
        auto coarse = sample_bump(0.0, 1.0, 0.5, 41);
        auto rep = resolvent_residual(resolvent_phi(coarse, 10.0), xs);
        REQUIRE_FALSE(rep.pass);
    }
    SECTION("lambda Phi_lambda vanishes with lambda") {
        auto seq = lambda_phi_sequence(g, 0.3, {1.0, 0.1, 0.01});
        REQUIRE(seq[0] > 0.0);
        REQUIRE(seq[1] < 0.6 * seq[0]);
        REQUIRE(seq[2] < 0.6 * seq[1]);
        REQUIRE(seq[2] < 0.2 * seq[0]);
    }
    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(resolvent_phi(g, 0.0), ConfigError);
        REQUIRE_THROWS_AS(resolvent_phi(g, -1.0), ConfigError);
        SampledBump tiny;
        tiny.y0 = 0.0;
        tiny.dy = 0.1;
        tiny.v = {0.0, 1.0, 0.0};
        REQUIRE_THROWS_AS(resolvent_phi(tiny, 1.0), ConfigError);
    }
}

TEST_CASE("generator slopes straddle zero exactly when the law is stationary") {
    auto g = sample_bump(0.15, 0.4, 0.2, 801);
    auto phi = resolvent_phi(g, 1.0);
    auto phi_fn = [&](double x) { return phi.value(x); };

    SECTION("identically zero paths") {
        PathSeries p;
        for (int i = 0; i <= 20; ++i) {
            p.t.push_back(0.5 * i);
            p.f.push_back(0.0);
        }
        auto rep = generator_stationarity_check(std::vector<PathSeries>{p, p, p}, phi_fn);
        REQUIRE(rep.slope == 0.0);
        REQUIRE(rep.stationary_ok);
        REQUIRE_FALSE(rep.drift_detected);
    }
    SECTION("a conserved observable counts as stationary despite roundoff") {
        auto basis = build_basis(1, 8);
        IntegrateOptions io;
        std::vector<PathSeries> runs;
        for (std::uint64_t seed : {61, 62}) {
            RngStream rng(seed, 0);
            auto u0 = random_field(basis, 1.2, rng, 0.5, 2.0);
            PathSeries ps;
            io.record_stride = 100;  // every 0.1 time units
            auto res = integrate_deterministic(u0, 1.0, io, [&](double t, const SpectralField& u) {
                ps.t.push_back(t);
                ps.f.push_back(mass(u));
            });
            (void)res;
            runs.push_back(std::move(ps));
        }
        auto rep = generator_stationarity_check(runs, phi_fn);
        REQUIRE(rep.stationary_ok);
        REQUIRE_FALSE(rep.drift_detected);
    }
    SECTION("the startup transient is flagged as drift") {
        auto basis = build_basis(1, 8);
        auto ch = make_channels(basis, NoiseSpec{});
        GrowthPair gp = GrowthPair::named("log1p");
        SdeOptions o;
        std::vector<PathSeries> runs;
        for (std::uint64_t seed = 71; seed < 77; ++seed) {
            RngStream rng(seed, 0);
            SpectralField u0(basis);
            PathSeries ps;
            sde_integrate(u0, 3.0, o, ch, gp, rng, [&](double t, const SpectralField& u) {
                if (ps.t.empty() || t >= ps.t.back() + 0.25 - 0.5 * o.dt) {
                    ps.t.push_back(t);
                    ps.f.push_back(mass(u));
                }
            });
            runs.push_back(std::move(ps));
        }
        auto rep = generator_stationarity_check(runs, phi_fn);
        REQUIRE(rep.drift_detected);
        REQUIRE(rep.raw_slope > 0.0);
    }
    SECTION("stationary window passes at a pinned seed") {
        auto basis = build_basis(1, 8);
        auto ch = make_channels(basis, NoiseSpec{});
        GrowthPair gp = GrowthPair::named("log1p");
        SdeOptions o;
        std::vector<PathSeries> runs;
        for (std::uint64_t seed = 81; seed < 89; ++seed) {
            RngStream rng(seed, 0);
            SpectralField u0(basis);
            PathSeries ps;
            sde_integrate(u0, 42.0, o, ch, gp, rng, [&](double t, const SpectralField& u) {
                if (t < 30.0) return;
                if (ps.t.empty() || t >= ps.t.back() + 0.5 - 0.5 * o.dt) {
                    ps.t.push_back(t);
                    ps.f.push_back(mass(u));
                }
            });
            runs.push_back(std::move(ps));
        }
        auto rep = generator_stationarity_check(runs, phi_fn);
        REQUIRE(rep.paths == 8);
        REQUIRE(rep.stationary_ok);
        REQUIRE_FALSE(rep.drift_detected);
    }
    SECTION("fewer than two paths is an error") {
        PathSeries p;
        p.t = {0.0, 1.0};
        p.f = {0.0, 0.0};
        REQUIRE_THROWS_AS(generator_stationarity_check(std::vector<PathSeries>{p}, phi_fn),
                          Error);
    }
}

TEST_CASE("small-ball probabilities sit under a linear envelope") {
    auto basis = build_basis(1, 8);
    std::vector<double> decade = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    SECTION("uniform radial law fits the envelope with constant one") {
        std::vector<SpectralField> snaps;
        for (int i = 0; i < 100; ++i) snaps.push_back(norm_field(basis, (i + 0.5) / 100.0));
        auto m = from_snaps(basis, std::move(snaps));
        auto rep = small_ball_probe(m, decade);
        REQUIRE_FALSE(rep.inconclusive);
        REQUIRE_FALSE(rep.degenerate);
        REQUIRE(rep.rows.back().prob == 1.0);  // the last ball swallows the support
        REQUIRE(rep.C == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(rep.pass);
        REQUIRE(rep.max_ratio == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("an atom at the origin violates the envelope at small radius") {
        std::vector<SpectralField> snaps(30, SpectralField(basis));
        for (int i = 0; i < 70; ++i) snaps.push_back(norm_field(basis, (i + 0.5) / 70.0));
        auto m = from_snaps(basis, std::move(snaps));
        auto rep = small_ball_probe(m, {0.01, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0});
        REQUIRE_FALSE(rep.inconclusive);
        REQUIRE_FALSE(rep.degenerate);
        REQUIRE_FALSE(rep.pass);
        REQUIRE(rep.rows[0].prob >= 0.3);

        // restricting away from the origin clears the violation
        auto r = restrict_measure(m, [](const SpectralField& u) { return l2_norm(u) > 0.05; });
        auto rep2 = small_ball_probe(r, {0.01, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0});
        REQUIRE(rep2.rows[0].prob == 0.0);
        REQUIRE(rep2.pass);
    }
    SECTION("grid below the support is inconclusive") {
        std::vector<SpectralField> snaps;
        for (int i = 0; i < 10; ++i) snaps.push_back(norm_field(basis, 2.0 + 0.1 * i));
        auto m = from_snaps(basis, std::move(snaps));
        auto rep = small_ball_probe(m, {0.1, 0.5, 1.0});
        REQUIRE(rep.inconclusive);
        REQUIRE_FALSE(rep.pass);
    }
    SECTION("point mass at zero is degenerate") {
        auto m = from_snaps(basis, std::vector<SpectralField>(5, SpectralField(basis)));
        auto rep = small_ball_probe(m, {0.5, 1.0});
        REQUIRE(rep.degenerate);
        REQUIRE(rep.rows[0].prob == 1.0);
        REQUIRE_FALSE(rep.pass);
    }
    SECTION("delta grid validation") {
        auto m = from_snaps(basis, {norm_field(basis, 0.5)});
        REQUIRE_THROWS_AS(small_ball_probe(m, {}), ConfigError);
        REQUIRE_THROWS_AS(small_ball_probe(m, {0.5, 0.5}), ConfigError);
        REQUIRE_THROWS_AS(small_ball_probe(m, {-1.0, 1.0}), ConfigError);
    }
}
