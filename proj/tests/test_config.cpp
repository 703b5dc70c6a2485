// The config registry drives parsing, serialization, and environment
// overrides from one field table, so serialize(parse(text)) == canonical(text)
// by construction. These tests pin the identity, the line-numbered
// diagnostics, and the derived option structs.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "snls/config.hpp"

using namespace snls;

TEST_CASE("default config round trips through text") {
    SimConfig cfg;
    std::string text = cfg.to_text();
    auto back = SimConfig::parse_text(text);
    REQUIRE(back.to_text() == text);
    REQUIRE(text.find("[model]") != std::string::npos);
    REQUIRE(text.find("[integrate]") != std::string::npos);
    REQUIRE(text.back() == '\n');
}

TEST_CASE("mutated fields survive the round trip") {
    SimConfig cfg;
    cfg.N = 16;
    cfg.dt = 5e-4;
    cfg.scheme = "exp-rk";
    cfg.squared_rho_arg = true;
    cfg.seeds = {7, 8, 9};
    cfg.sweep_alphas = {0.5, 0.1, 0.02};
    cfg.xi = "sqrt1p";
    cfg.pack = "runs/measure.snlsp";

    auto back = SimConfig::parse_text(cfg.to_text());
    REQUIRE(back.N == 16);
    REQUIRE(back.dt == 5e-4);
    REQUIRE(back.scheme == "exp-rk");
    REQUIRE(back.squared_rho_arg);
    REQUIRE(back.seeds == std::vector<std::uint64_t>{7, 8, 9});
    REQUIRE(back.sweep_alphas == std::vector<double>{0.5, 0.1, 0.02});
    REQUIRE(back.xi == "sqrt1p");
    REQUIRE(back.pack == "runs/measure.snlsp");
    REQUIRE(back.to_text() == cfg.to_text());
}

TEST_CASE("parse diagnostics carry the line number") {
    auto fails_with = [](const std::string& text, const std::string& needle) {
        try {
            SimConfig::parse_text(text);
            FAIL("expected ConfigError for: " << text);
        } catch (const ConfigError& e) {
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    fails_with("dt = 1e-3\n", "line 1");
    fails_with("[model]\nN 8\n", "line 2");
    fails_with("[model\nN = 8\n", "line 1");
    fails_with("[model]\nQ = 8\n", "model.Q");
    fails_with("[integrate]\ndt = fast\n", "integrate.dt");
    fails_with("[model]\nN = 8.5\n", "model.N");
}

TEST_CASE("comments and blank lines are ignored") {
    auto cfg = SimConfig::parse_text(
        "# damped run\n\n[sde]\nalpha = 0.25   # halved\n\n[model]\nN = 4\n");
    REQUIRE(cfg.alpha == 0.25);
    REQUIRE(cfg.N == 4);
}

TEST_CASE("environment overrides hit the same registry") {
    ::setenv("SNLS_MODEL_N", "32", 1);
    ::setenv("SNLS_SAMPLE_SEEDS", "4, 5, 6", 1);
    SimConfig cfg;
    int n = cfg.apply_env();
    ::unsetenv("SNLS_MODEL_N");
    ::unsetenv("SNLS_SAMPLE_SEEDS");
    REQUIRE(n == 2);
    REQUIRE(cfg.N == 32);
    REQUIRE(cfg.seeds == std::vector<std::uint64_t>{4, 5, 6});

    ::setenv("SNLS_INTEGRATE_DT", "soon", 1);
    SimConfig bad;
    REQUIRE_THROWS_AS(bad.apply_env(), ConfigError);
    ::unsetenv("SNLS_INTEGRATE_DT");
}

TEST_CASE("validation rejects unusable configs") {
    auto broken = [](auto&& mutate) {
        SimConfig cfg;
        mutate(cfg);
        REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    };
    broken([](SimConfig& c) { c.d = 4; });
    broken([](SimConfig& c) { c.N = 0; });
    broken([](SimConfig& c) { c.dt = 0.0; });
    broken([](SimConfig& c) { c.scheme = "rk4"; });
    broken([](SimConfig& c) { c.xi = "banana"; });
    broken([](SimConfig& c) { c.count = 0; });
    broken([](SimConfig& c) { c.seeds.clear(); });
}

TEST_CASE("derived option structs mirror the fields") {
    SimConfig cfg;
    cfg.N = 4;
    cfg.dt = 2e-3;
    cfg.alpha = 0.125;
    cfg.p = 5.0;

    auto io = cfg.integrate_options();
    REQUIRE(io.dt == 2e-3);
    REQUIRE(io.p == 5.0);

    auto so = cfg.sde_options();
    REQUIRE(so.alpha == 0.125);
    REQUIRE(so.dt == 2e-3);
    REQUIRE(so.taming_factor == cfg.taming_factor);

    auto sp = cfg.sample_params();
    REQUIRE(sp.burn_in == cfg.burn_in);
    REQUIRE(sp.count == cfg.count);
    REQUIRE(sp.seeds == cfg.seeds);

    auto basis = cfg.make_basis();
    REQUIRE(basis->d == 1);
    REQUIRE(basis->cutoff == 4);

    REQUIRE(cfg.growth_pair().name() == cfg.xi);
    REQUIRE(cfg.noise_spec().s == cfg.s);
}

TEST_CASE("assign reaches any registered key") {
    SimConfig cfg;
    cfg.assign("model", "N", "24");
    REQUIRE(cfg.N == 24);
    cfg.assign("sigma", "i_list", "2, 4");
    REQUIRE(cfg.i_list == std::vector<int>{2, 4});
    REQUIRE_FALSE(cfg.assign("model", "nope", "1"));
    REQUIRE_THROWS_AS(cfg.assign("sde", "alpha", "much"), ConfigError);
}
