// snls: experiment driver over the simulation library.
//
// Every subcommand reads one flat config (file, then SNLS_* environment
// overrides), writes its artifacts into --out, and finishes with a
// manifest.json listing every artifact digest. The run id is a digest of the
// canonical config text plus the subcommand, computed before any work: two
// identical invocations share the id and their binary artifacts match byte
// for byte. Text artifacts carry the id inline; packs and field files carry
// it as the optional trailing header token.
//
// Exit codes: 0 ok, 2 config/usage error, 3 blow-up, 4 failed --check, 1
// any other error.
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "snls/balance.hpp"
#include "snls/config.hpp"
#include "snls/density.hpp"
#include "snls/measure.hpp"
#include "snls/sigma.hpp"
#include "snls/svg.hpp"

namespace snls {
namespace {

const char* const USAGE = R"(usage: snls <subcommand> [--config FILE] [--out DIR] [--seed N]
            [--threads N] [--check]

subcommands
  simulate     deterministic flow; trajectory CSV + final state
  sde          damped-driven flow; mass/energy balance identities
  sample       time-average sampling of the stationary law; snapshot pack
  sweep        decreasing-damping sweep; one measure per alpha + trend
  invariance   push-forward KS comparison of sampled observables
  sigma        slow-growth ensemble certificates
  coupling     damped-vs-undamped pathwise comparison
  density      observable laws, quadratic variations, resolvent checks
  smallball    mu(B_delta) against a linear envelope
  scale        noise-budget scaling of the dissipation functional
  cumulative   geometric mixture of the scaled measures
  convergence  cutoff-truncation error study
  oracle       closed-form self-tests (always checked)

flags
  --config FILE  flat key = value config with [sections]
  --out DIR      artifact directory (default: out)
  --seed N       replaces the seed list and the initial-data seed
  --threads N    worker threads where reductions stay deterministic
  --check        exit 4 when the subcommand's pass predicate fails
)";

struct Cli {
    std::string sub;
    std::string config_path;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    bool check = false;
};

struct RunCtx {
    Cli cli;
    SimConfig cfg;
    std::string config_text;  // canonical form, post-overrides
    std::string run_id;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::string> failures;  // failed check predicates by name
    bool ok = true;
    long steps = 0;
};

Cli parse_cli(int argc, char** argv) {
    Cli cli;
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto need_value = [&]() -> const std::string& {
            if (i + 1 >= args.size()) throw ConfigError("flag " + a + " needs a value");
            return args[++i];
        };
        if (a == "--config") cli.config_path = need_value();
        else if (a == "--out") cli.out = need_value();
        else if (a == "--seed") {
            cli.seed = static_cast<std::uint64_t>(detail::parse_int(need_value(), "--seed"));
            cli.seed_set = true;
        } else if (a == "--threads") {
            cli.threads = static_cast<int>(detail::parse_int(need_value(), "--threads"));
            if (cli.threads < 1) throw ConfigError("--threads must be >= 1");
        } else if (a == "--check") cli.check = true;
        else if (a == "--help" || a == "-h") cli.sub = "help";
        else if (!a.empty() && a[0] == '-') throw ConfigError("unknown flag " + a);
        else if (cli.sub.empty()) cli.sub = a;
        else throw ConfigError("unexpected argument " + a);
    }
    if (cli.sub.empty()) throw ConfigError("missing subcommand (try --help)");
    return cli;
}

// ---------------------------------------------------------------- artifacts

std::string art_path(const RunCtx& ctx, const std::string& name) {
    return (std::filesystem::path(ctx.cli.out) / name).string();
}

void note_check(RunCtx& ctx, const std::string& name, bool pass) {
    if (!pass) {
        ctx.ok = false;
        ctx.failures.push_back(name);
    }
    std::printf("  check %-24s %s\n", name.c_str(), pass ? "pass" : "FAIL");
}

Json base_report(const RunCtx& ctx) {
    Json j = Json::object();
    j.set("run_id", ctx.run_id);
    j.set("tool", std::string("snls ") + TOOL_VERSION);
    j.set("subcommand", ctx.cli.sub);
    return j;
}

Json ci_json(const Ci& ci) {
    Json j = Json::object();
    j.set("lo", ci.lo);
    j.set("hi", ci.hi);
    j.set("level", ci.level);
    return j;
}

void put_json(RunCtx& ctx, const std::string& name, const Json& j) {
    auto path = art_path(ctx, name);
    save_text(path, j.dump() + "\n");
    ctx.outputs.push_back(path);
}

void put_csv(RunCtx& ctx, const std::string& name, const std::vector<std::string>& cols,
             const std::vector<std::vector<double>>& rows) {
    std::string text = "# run " + ctx.run_id + "\n";
    for (std::size_t j = 0; j < cols.size(); ++j) text += (j ? "," : "") + cols[j];
    text += "\n";
    for (const auto& r : rows) {
        if (r.size() != cols.size()) throw Error("csv: ragged row in " + name);
        for (std::size_t j = 0; j < r.size(); ++j)
            text += (j ? "," : "") + fmt_double(r[j]);
        text += "\n";
    }
    auto path = art_path(ctx, name);
    save_text(path, text);
    ctx.outputs.push_back(path);
}

void put_svg(RunCtx& ctx, const std::string& name, SvgPlot& plot) {
    plot.set_comment("run " + ctx.run_id);
    auto path = art_path(ctx, name);
    plot.save(path);
    ctx.outputs.push_back(path);
}

void put_pack(RunCtx& ctx, const std::string& name, const EmpiricalMeasure& m) {
    FieldHeader h{ctx.cfg.d, ctx.cfg.N, ctx.cfg.p, ctx.cfg.s, ctx.cfg.eps};
    auto path = art_path(ctx, name);
    save_pack(path, m.snaps, m.weights, h, ctx.run_id);
    ctx.outputs.push_back(path);
}

void write_manifest(RunCtx& ctx, double wall_seconds) {
    Json m = Json::object();
    m.set("tool", "snls");
    m.set("version", TOOL_VERSION);
    m.set("subcommand", ctx.cli.sub);
    m.set("run_id", ctx.run_id);
    m.set("config", ctx.config_text);
    Json seeds = Json::array();
    for (auto s : ctx.cfg.seeds) seeds.push(Json::num(static_cast<double>(s)));
    m.set("seeds", std::move(seeds));
    Json in = Json::object();
    for (const auto& p : ctx.inputs) in.set(p, hex64(file_digest(p)));
    m.set("inputs", std::move(in));
    Json out = Json::object();
    for (const auto& p : ctx.outputs) out.set(p, hex64(file_digest(p)));
    m.set("outputs", std::move(out));
    m.set("wall_seconds", wall_seconds);
    m.set("steps", static_cast<double>(ctx.steps));
    m.set("check_passed", ctx.ok);
    if (!ctx.failures.empty()) {
        Json f = Json::array();
        for (const auto& name : ctx.failures) f.push(Json::str(name));
        m.set("failed_checks", std::move(f));
    }
    save_text(art_path(ctx, "manifest.json"), m.dump() + "\n");
}

// ------------------------------------------------------------------ helpers

// Chains run one per seed with the library's quota split; with threads > 1
// they run concurrently and merge in seed order, reproducing the serial
// output byte for byte (a blown-up chain still truncates the later ones).
EmpiricalMeasure sample_measure(const RunCtx& ctx, const BasisPtr& basis, const SdeOptions& o,
                                const NoiseChannels& ch, const GrowthPair& gp,
                                const SampleParams& sp) {
    std::size_t chains = sp.seeds.size();
    if (ctx.cli.threads <= 1 || chains <= 1)
        return krylov_bogoliubov_sample(basis, o, ch, gp, sp);

    std::vector<EmpiricalMeasure> part(chains);
    std::vector<std::exception_ptr> errs(chains);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t c = cursor.fetch_add(1);
            if (c >= chains) return;
            try {
                SampleParams one;
                one.burn_in = sp.burn_in;
                one.stride = sp.stride;
                one.count = sp.count / chains + (c < sp.count % chains ? 1 : 0);
                one.seeds = {sp.seeds[c]};
                if (one.count > 0) part[c] = krylov_bogoliubov_sample(basis, o, ch, gp, one);
            } catch (...) {
                errs[c] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(ctx.cli.threads), chains);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    EmpiricalMeasure m;
    m.basis = basis;
    m.meta = {o.alpha, sp.burn_in, sp.stride, o.dt, sp.seeds, "krylov_bogoliubov_sample"};
    for (std::size_t c = 0; c < chains; ++c) {
        for (auto& u : part[c].snaps) m.snaps.push_back(std::move(u));
        if (!part[c].valid) {
            m.valid = false;
            m.error = part[c].error;
            break;
        }
    }
    if (!m.snaps.empty()) {
        m.weights.assign(m.snaps.size(), 1.0);
        m.normalize();
    }
    return m;
}

// A sampling chain that blew up surfaces as the blow-up it was, keeping the
// chain context the library recorded.
struct SamplingBlowup : BlowupError {
    std::string detail;
    explicit SamplingBlowup(const std::string& d) : BlowupError(0.0, 0.0), detail(d) {}
    const char* what() const noexcept override { return detail.c_str(); }
};

// Loading a pack that names a producing run requires that run's manifest next
// to it; a missing or non-matching manifest is a dangling reference.
EmpiricalMeasure load_pack_checked(RunCtx& ctx, const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("pack file does not exist: " + path);
    EmpiricalMeasure m;
    FieldHeader h;
    std::string rid;
    load_pack(path, m.snaps, m.weights, &h, &rid);
    m.basis = m.snaps.empty() ? build_basis(h.d, h.N) : m.snaps.front().basis;
    m.meta.parent = "pack:" + path;
    if (!rid.empty()) {
        auto man = std::filesystem::path(path).parent_path() / "manifest.json";
        if (!std::filesystem::exists(man))
            throw Error("pack " + path + " names run " + rid + " but " + man.string() +
                        " does not exist");
        if (load_text(man.string()).find(rid) == std::string::npos)
            throw Error("pack " + path + " names run " + rid + " which " + man.string() +
                        " does not record");
    }
    // the pack header is authoritative for the model the snapshots live in
    ctx.cfg.d = h.d;
    ctx.cfg.N = h.N;
    ctx.cfg.p = h.p;
    ctx.cfg.s = h.s;
    ctx.cfg.eps = h.eps;
    ctx.inputs.push_back(path);
    return m;
}

// Measure-consuming subcommands either analyze cfg's pack or sample inline.
EmpiricalMeasure acquire_measure(RunCtx& ctx) {
    if (!ctx.cfg.pack.empty()) return load_pack_checked(ctx, ctx.cfg.pack);
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto ch = make_channels(basis, cfg.noise_spec());
    auto m = sample_measure(ctx, basis, cfg.sde_options(), ch, cfg.growth_pair(),
                            cfg.sample_params());
    ctx.steps += static_cast<long>((cfg.burn_in + cfg.stride * static_cast<double>(cfg.count)) /
                                   cfg.dt);
    if (!m.valid) throw SamplingBlowup("sampling aborted: " + m.error);
    return m;
}

Json measure_summary(const EmpiricalMeasure& m, const SimConfig& cfg, double alpha) {
    CollocationGrid grid(m.basis, cfg.oversample);
    auto gp = cfg.growth_pair();
    Json j = Json::object();
    j.set("snapshots", m.size());
    j.set("chains", m.meta.seeds.size());
    j.set("alpha", alpha);
    j.set("burn_in", m.meta.burn_in);
    j.set("stride", m.meta.stride);
    j.set("dt", m.meta.dt);
    j.set("valid", m.valid);
    if (!m.error.empty()) j.set("error", m.error);
    Json obs = Json::object();
    obs.set("mean_mass", m.expectation([](const SpectralField& u) { return l2_norm_sq(u); }));
    obs.set("mean_hs_norm",
            m.expectation([&](const SpectralField& u) { return sobolev_norm(u, cfg.s); }));
    obs.set("mean_energy",
            m.expectation([&](const SpectralField& u) { return grid.energy(u, cfg.p); }));
    obs.set("mean_dissipation", m.expectation([&](const SpectralField& u) {
        return dissipation_M(u, cfg.s, cfg.eps, gp, cfg.squared_rho_arg).value;
    }));
    j.set("observables", std::move(obs));
    return j;
}

// -------------------------------------------------------------- subcommands

void cmd_simulate(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    RngStream rng(cfg.u0_seed, 0);
    auto u0 = random_field(basis, cfg.u0_decay, rng, cfg.u0_norm, cfg.s);
    auto io = cfg.integrate_options();
    CollocationGrid grid(basis, io.oversample);

    double m0 = mass(u0), e0 = grid.energy(u0, io.p);
    std::vector<std::vector<double>> rows;
    rows.push_back({0.0, m0, e0, l2_norm(u0), sobolev_norm(u0, io.s_check)});
    double next = cfg.record_every;
    double mass_drift = 0.0, energy_drift = 0.0;
    auto uT = integrate_deterministic(u0, cfg.T, io, [&](double t, const SpectralField& u) {
        ++ctx.steps;
        mass_drift = std::max(mass_drift, std::abs(mass(u) - m0) / std::max(m0, 1e-300));
        energy_drift = std::max(energy_drift,
                                std::abs(grid.energy(u, io.p) - e0) / std::max(std::abs(e0), 1e-300));
        if (t + 1e-12 >= next) {
            rows.push_back({t, mass(u), grid.energy(u, io.p), l2_norm(u),
                            sobolev_norm(u, io.s_check)});
            next += cfg.record_every;
        }
    });

    put_csv(ctx, "trajectory.csv", {"t", "mass", "energy", "l2_norm", "hs_norm"}, rows);
    FieldHeader h{cfg.d, cfg.N, cfg.p, cfg.s, cfg.eps};
    auto final_path = art_path(ctx, "final.snls1");
    save_field(final_path, uT, h, ctx.run_id);
    ctx.outputs.push_back(final_path);

    Json rep = base_report(ctx);
    rep.set("T", cfg.T);
    rep.set("dt", cfg.dt);
    rep.set("scheme", cfg.scheme);
    rep.set("initial_mass", m0);
    rep.set("initial_energy", e0);
    rep.set("final_mass", mass(uT));
    rep.set("final_energy", grid.energy(uT, io.p));
    rep.set("final_hs_norm", sobolev_norm(uT, io.s_check));
    rep.set("max_rel_mass_drift", mass_drift);
    rep.set("max_rel_energy_drift", energy_drift);
    rep.set("steps", static_cast<double>(ctx.steps));
    put_json(ctx, "simulate.json", rep);

    std::vector<double> ts, l2s, hss;
    for (const auto& r : rows) {
        ts.push_back(r[0]);
        l2s.push_back(r[3]);
        hss.push_back(r[4]);
    }
    SvgPlot plot("Deterministic trajectory", "t", "norm");
    plot.add_line("l2_norm", ts, l2s);
    plot.add_line("hs_norm", ts, hss);
    put_svg(ctx, "trajectory.svg", plot);

    note_check(ctx, "mass_conserved", mass_drift <= 1e-8);
}

void cmd_sde(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto ch = make_channels(basis, cfg.noise_spec());
    auto gp = cfg.growth_pair();
    auto o = cfg.sde_options();
    SpectralField u0(basis);
    auto paths = static_cast<std::size_t>(cfg.balance_paths);
    std::uint64_t seed = cfg.seeds.front();

    std::vector<double> t_grid = {0.25 * cfg.balance_t, 0.5 * cfg.balance_t, cfg.balance_t};
    Json rep = base_report(ctx);
    rep.set("paths", paths);
    rep.set("alpha", cfg.alpha);
    rep.set("noise_budget", ch.A0N);
    Json mass_rows = Json::array();
    std::vector<std::vector<double>> csv_rows;
    bool all_pass = true;
    for (double t : t_grid) {
        auto b = ito_mass_balance(u0, t, paths, o, ch, gp, seed, cfg.ci_level);
        ctx.steps += static_cast<long>(t / cfg.dt) * static_cast<long>(paths);
        Json row = Json::object();
        row.set("t", b.t);
        row.set("mean_start", b.mean_start);
        row.set("mean_end", b.mean_end);
        row.set("mean_dissipation", b.mean_dissipation);
        row.set("forcing", b.forcing);
        row.set("residual", b.residual);
        row.set("ci", ci_json(b.ci));
        row.set("pass", b.pass);
        mass_rows.push(std::move(row));
        csv_rows.push_back({b.t, b.residual, b.ci.lo, b.ci.hi, b.pass ? 1.0 : 0.0});
        all_pass = all_pass && b.pass;
    }
    rep.set("mass_balance", std::move(mass_rows));

    auto e = ito_energy_balance(u0, cfg.balance_t, paths, o, ch, gp, seed, cfg.ci_level);
    ctx.steps += static_cast<long>(cfg.balance_t / cfg.dt) * static_cast<long>(paths);
    Json ej = Json::object();
    ej.set("t", e.t);
    ej.set("mean_start", e.mean_start);
    ej.set("mean_end", e.mean_end);
    ej.set("mean_dissipation", e.mean_dissipation);
    ej.set("residual", e.residual);
    ej.set("ci", ci_json(e.ci));
    ej.set("pass", e.pass);
    ej.set("residual_weak_form", e.residual_stated);
    ej.set("ci_weak_form", ci_json(e.ci_stated));
    ej.set("weak_form_holds", e.stated_holds);
    rep.set("energy_balance", std::move(ej));
    put_json(ctx, "balance.json", rep);
    put_csv(ctx, "balance.csv", {"t", "residual", "ci_lo", "ci_hi", "pass"}, csv_rows);

    note_check(ctx, "mass_balance", all_pass);
    note_check(ctx, "energy_balance", e.pass);
}

void cmd_sample(RunCtx& ctx) {
    auto m = acquire_measure(ctx);
    put_pack(ctx, "measure.snlsp", m);
    Json rep = base_report(ctx);
    rep.set("measure_id", ctx.run_id);
    rep.set("summary", measure_summary(m, ctx.cfg, ctx.cfg.alpha));
    auto ch = make_channels(m.basis, ctx.cfg.noise_spec());
    rep.set("target_dissipation", 0.5 * ch.A0N);
    rep.set("pack", "measure.snlsp");
    put_json(ctx, "measure.json", rep);
    note_check(ctx, "measure_valid", m.valid);
}

void cmd_sweep(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto ch = make_channels(basis, cfg.noise_spec());
    auto gp = cfg.growth_pair();
    auto rep = inviscid_sweep(basis, cfg.sde_options(), ch, gp, cfg.sweep_alphas, cfg.burn_base,
                              cfg.stride_base, static_cast<std::size_t>(cfg.count), cfg.seeds);
    for (double a : cfg.sweep_alphas)
        ctx.steps += static_cast<long>((cfg.burn_base / a + cfg.stride_base / a *
                                        static_cast<double>(cfg.count)) / cfg.dt);

    std::vector<std::vector<double>> trend;
    Json rows = Json::array();
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        std::string stem = "measure_a" + std::to_string(i);
        put_pack(ctx, stem + ".snlsp", rep.measures[i]);
        Json mj = base_report(ctx);
        mj.set("measure_id", ctx.run_id + "-a" + std::to_string(i));
        mj.set("summary", measure_summary(rep.measures[i], cfg, r.alpha));
        mj.set("target_dissipation", r.target);
        mj.set("pack", stem + ".snlsp");
        put_json(ctx, stem + ".json", mj);

        trend.push_back({r.alpha, r.mean_M, r.ci_M.lo, r.ci_M.hi, r.target, r.mean_mass,
                         r.mean_Hs, r.mean_E});
        Json row = Json::object();
        row.set("alpha", r.alpha);
        row.set("mean_dissipation", r.mean_M);
        row.set("ci", ci_json(r.ci_M));
        row.set("target", r.target);
        row.set("mean_mass", r.mean_mass);
        row.set("mean_hs_norm", r.mean_Hs);
        row.set("mean_energy", r.mean_E);
        rows.push(std::move(row));
    }
    put_csv(ctx, "trend.csv",
            {"alpha", "mean_dissipation", "ci_lo", "ci_hi", "target", "mean_mass", "mean_hs_norm",
             "mean_energy"},
            trend);
    Json sj = base_report(ctx);
    sj.set("rows", std::move(rows));
    sj.set("pinned", rep.pinned);
    sj.set("continuous", rep.continuous);
    put_json(ctx, "sweep.json", sj);

    std::vector<double> alphas, means, targets;
    for (const auto& r : rep.rows) {
        alphas.push_back(r.alpha);
        means.push_back(r.mean_M);
        targets.push_back(r.target);
    }
    SvgPlot plot("Dissipation functional vs damping", "alpha", "mean dissipation");
    plot.add_line("sampled", alphas, means);
    plot.add_line("identity target", alphas, targets, /*dashed=*/true);
    put_svg(ctx, "sweep.svg", plot);

    note_check(ctx, "target_pinned", rep.pinned);
    note_check(ctx, "no_observable_jump", rep.continuous);
}

void cmd_invariance(RunCtx& ctx) {
    auto m = acquire_measure(ctx);
    auto rep = invariance_test(m, ctx.cfg.invariance_t, ctx.cfg.integrate_options());
    ctx.steps += static_cast<long>(ctx.cfg.invariance_t / ctx.cfg.dt) *
                 static_cast<long>(m.size());

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        Json row = Json::object();
        row.set("observable", r.name);
        row.set("ks", r.ks);
        row.set("pvalue", r.pvalue);
        row.set("mean_pre", r.mean_pre);
        row.set("mean_post", r.mean_post);
        row.set("var_pre", r.var_pre);
        row.set("var_post", r.var_post);
        rows.push(std::move(row));
        csv.push_back({static_cast<double>(i), r.ks, r.pvalue, r.mean_pre, r.mean_post});
    }
    Json j = base_report(ctx);
    j.set("t", rep.t);
    j.set("rows", std::move(rows));
    j.set("max_ks", rep.max_ks);
    j.set("p_threshold", rep.p_threshold);
    j.set("pass", rep.pass);
    put_json(ctx, "invariance.json", j);
    put_csv(ctx, "invariance.csv", {"row", "ks", "pvalue", "mean_pre", "mean_post"}, csv);
    note_check(ctx, "pushforward_invariance", rep.pass);
}

void cmd_sigma(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto m = acquire_measure(ctx);
    auto gp = cfg.growth_pair();
    auto io = cfg.integrate_options();
    auto rep = sigma_ensemble(m, cfg.i_list, cfg.j_max, cfg.sigma_r, gp, io, cfg.sigma_safety);
    ctx.steps += static_cast<long>(std::exp(cfg.j_max) / cfg.dt) * static_cast<long>(m.size());

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    for (const auto& r : rep.rows) {
        Json row = Json::object();
        row.set("i", r.i);
        row.set("total", r.total);
        row.set("rejected", r.rejected);
        row.set("rejected_fraction", r.rejected_fraction);
        row.set("max_envelope_ratio", r.max_envelope_ratio);
        row.set("envelope_ok", r.envelope_ok);
        rows.push(std::move(row));
        csv.push_back({static_cast<double>(r.i), static_cast<double>(r.total),
                       static_cast<double>(r.rejected), r.rejected_fraction,
                       r.max_envelope_ratio});
    }
    Json j = base_report(ctx);
    j.set("rows", std::move(rows));
    j.set("slope", rep.slope);
    j.set("fit_points", rep.fit_points);
    j.set("slope_ok", rep.slope_ok);
    j.set("envelope_ok", rep.envelope_ok);
    j.set("blowups", rep.blowups);
    put_json(ctx, "sigma.json", j);
    put_csv(ctx, "sigma.csv",
            {"i", "total", "rejected", "rejected_fraction", "max_envelope_ratio"}, csv);

    // one member's norm history against the slow-growth envelopes
    auto tr = sigma_trace(m.snaps.front(), cfg.j_max, cfg.sigma_r, io);
    if (!tr.t.empty()) {
        std::vector<double> env_lo(tr.t.size()), env_hi(tr.t.size());
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            env_lo[k] = 2.0 * gp.xi(1.0 + cfg.i_list.front() + std::log1p(tr.t[k]));
            env_hi[k] = 2.0 * gp.xi(1.0 + cfg.i_list.back() + std::log1p(tr.t[k]));
        }
        SvgPlot plot("Slow-growth envelope", "t", "H^r norm");
        plot.add_line("member norm", tr.t, tr.norm_r);
        plot.add_line("2 xi(1+i_min+ln(1+t))", tr.t, env_lo, /*dashed=*/true);
        plot.add_line("2 xi(1+i_max+ln(1+t))", tr.t, env_hi, /*dashed=*/true);
        put_svg(ctx, "envelope.svg", plot);
    }

    note_check(ctx, "rejection_decay", rep.slope_ok);
    note_check(ctx, "growth_envelope", rep.envelope_ok);
    note_check(ctx, "no_blowups", rep.blowups == 0);
}

void cmd_coupling(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto ch = make_channels(basis, cfg.noise_spec());
    RngStream rng(cfg.u0_seed, 0);
    auto u0 = random_field(basis, cfg.u0_decay, rng, cfg.u0_norm, cfg.s);
    auto rep = coupling_study(u0, cfg.coupling_alphas, cfg.coupling_t, cfg.r_cut,
                              cfg.sde_options(), ch, cfg.growth_pair(),
                              static_cast<std::size_t>(cfg.coupling_paths), cfg.seeds.front());
    ctx.steps += static_cast<long>(cfg.coupling_t / cfg.dt) *
                 static_cast<long>(cfg.coupling_paths * cfg.coupling_alphas.size());

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    std::vector<double> alphas, errors;
    for (const auto& r : rep.rows) {
        Json row = Json::object();
        row.set("alpha", r.alpha);
        row.set("error", r.error);
        row.set("event_prob", r.event_prob);
        rows.push(std::move(row));
        csv.push_back({r.alpha, r.error, r.event_prob});
        alphas.push_back(r.alpha);
        errors.push_back(r.error);
    }
    Json j = base_report(ctx);
    j.set("t", rep.t);
    j.set("r_cut", rep.r_cut);
    j.set("rows", std::move(rows));
    j.set("decreasing", rep.decreasing);
    put_json(ctx, "coupling.json", j);
    put_csv(ctx, "coupling.csv", {"alpha", "error", "event_prob"}, csv);

    SvgPlot plot("Damped vs undamped flow", "alpha", "kept-event L2 error");
    plot.add_line("error", alphas, errors);
    put_svg(ctx, "coupling.svg", plot);
    note_check(ctx, "error_decreasing", rep.decreasing);
}

Json distribution_json(const ObservableDistribution& dist) {
    Json j = Json::object();
    j.set("tag", dist.tag);
    j.set("samples", dist.values.size());
    j.set("bins", dist.masses.size());
    j.set("total_mass", dist.total_mass());
    j.set("bandwidth", dist.bandwidth);
    j.set("atom_at_zero", dist.atom_at_zero());
    Json atoms = Json::array();
    for (const auto& a : dist.atoms) {
        Json aj = Json::object();
        aj.set("value", a.value);
        aj.set("mass", a.mass);
        atoms.push(std::move(aj));
    }
    j.set("atoms", std::move(atoms));
    return j;
}

void hist_artifacts(RunCtx& ctx, const std::string& stem, const std::string& title,
                    const ObservableDistribution& dist) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < dist.masses.size(); ++i) {
        double width = dist.edges[i + 1] - dist.edges[i];
        rows.push_back({dist.edges[i], dist.edges[i + 1], dist.masses[i],
                        width > 0.0 ? dist.masses[i] / width : 0.0});
    }
    put_csv(ctx, stem + ".csv", {"edge_lo", "edge_hi", "mass", "density"}, rows);

    std::vector<double> heights(dist.masses.size());
    for (std::size_t i = 0; i < heights.size(); ++i) {
        double width = dist.edges[i + 1] - dist.edges[i];
        heights[i] = width > 0.0 ? dist.masses[i] / width : 0.0;
    }
    SvgPlot plot(title, dist.tag, "density");
    plot.add_histogram("empirical", dist.edges, heights);
    if (dist.bandwidth > 0.0) {
        std::vector<double> xs, ys;
        double lo = dist.edges.front(), hi = dist.edges.back();
        for (int k = 0; k <= 160; ++k) {
            double x = lo + (hi - lo) * static_cast<double>(k) / 160.0;
            xs.push_back(x);
            ys.push_back(dist.kde(x));
        }
        plot.add_line("kernel estimate", xs, ys);
    }
    put_svg(ctx, stem + ".svg", plot);
}

void cmd_density(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto m = acquire_measure(ctx);
    auto mass_dist = mass_distribution(m, static_cast<std::size_t>(cfg.nbins));
    auto energy_dist = energy_distribution(m, cfg.p, cfg.oversample,
                                           static_cast<std::size_t>(cfg.nbins));
    hist_artifacts(ctx, "mass_hist", "Mass law", mass_dist);
    hist_artifacts(ctx, "energy_hist", "Energy law", energy_dist);

    // quadratic variations along the noise directions; the energy form is
    // reported with and without the mass term since the two appear in
    // different statements of the same bound
    auto ch = make_channels(m.basis, cfg.noise_spec());
    CollocationGrid grid(m.basis, cfg.oversample);
    double qv_mass = 0.0, qv_energy = 0.0, qv_energy_nomass = 0.0, qv_mass_min = INFINITY;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double qm = quadratic_variation_mass(m.snaps[i], ch);
        qv_mass += m.weights[i] * qm;
        qv_mass_min = std::min(qv_mass_min, qm);
        qv_energy += m.weights[i] * quadratic_variation_energy(m.snaps[i], ch, grid, cfg.p, true);
        qv_energy_nomass +=
            m.weights[i] * quadratic_variation_energy(m.snaps[i], ch, grid, cfg.p, false);
    }

    // resolvent table on a compact bump straddling the observable range
    auto g = sample_bump(0.0, 1.0, 0.5, 2001);
    std::vector<double> xs;
    for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.1) xs.push_back(x);
    Json res_rows = Json::array();
    std::vector<std::vector<double>> res_csv;
    bool resolvent_pass = true;
    for (double lam : cfg.lambda_grid) {
        auto rr = resolvent_residual(resolvent_phi(g, lam), xs);
        Json row = Json::object();
        row.set("lambda", rr.lambda);
        row.set("residual", rr.residual);
        row.set("tol", rr.tol);
        row.set("pass", rr.pass);
        res_rows.push(std::move(row));
        res_csv.push_back({rr.lambda, rr.residual});
        resolvent_pass = resolvent_pass && rr.pass;
    }
    put_csv(ctx, "resolvent.csv", {"lambda", "residual"}, res_csv);

    // generator stationarity surrogate on fresh paths of the sampled flow
    auto gp = cfg.growth_pair();
    auto o = cfg.sde_options();
    auto phi = resolvent_phi(sample_bump(0.3, 0.35, 0.25, 801), 1.0);
    std::vector<PathSeries> runs;
    double horizon = cfg.burn_in + cfg.gen_window;
    for (int c = 0; c < cfg.gen_paths; ++c) {
        RngStream rng(cfg.seeds.front(), 9000 + static_cast<std::uint64_t>(c));
        SpectralField z(m.basis);
        PathSeries ps;
        double next = cfg.burn_in;
        sde_integrate(z, horizon, o, ch, gp, rng, [&](double t, const SpectralField& u) {
            if (t + 1e-12 >= next) {
                ps.t.push_back(t);
                ps.f.push_back(l2_norm_sq(u));
                next += cfg.stride;
            }
        });
        runs.push_back(std::move(ps));
        ctx.steps += static_cast<long>(horizon / cfg.dt);
    }
    auto gen = generator_stationarity_check(runs, [&](double x) { return phi.value(x); });

    Json j = base_report(ctx);
    j.set("mass_law", distribution_json(mass_dist));
    j.set("energy_law", distribution_json(energy_dist));
    Json qv = Json::object();
    qv.set("mass", qv_mass);
    qv.set("mass_min", qv_mass_min);
    qv.set("energy_with_mass_term", qv_energy);
    qv.set("energy_without_mass_term", qv_energy_nomass);
    qv.set("mass_term_gap", qv_energy - qv_energy_nomass);
    j.set("quadratic_variation", std::move(qv));
    j.set("resolvent", std::move(res_rows));
    Json gj = Json::object();
    gj.set("slope", gen.slope);
    gj.set("ci", ci_json(gen.ci));
    gj.set("stationary_ok", gen.stationary_ok);
    gj.set("raw_slope", gen.raw_slope);
    gj.set("drift_detected", gen.drift_detected);
    gj.set("paths", gen.paths);
    j.set("generator", std::move(gj));
    put_json(ctx, "density.json", j);

    note_check(ctx, "mass_conserved_by_bins",
               std::abs(mass_dist.total_mass() - 1.0) <= 1e-12 &&
                   std::abs(energy_dist.total_mass() - 1.0) <= 1e-12);
    note_check(ctx, "noise_sees_state", qv_mass_min > 0.0 || m.size() == 0);
    note_check(ctx, "resolvent_ode", resolvent_pass);
    note_check(ctx, "generator_stationary", gen.stationary_ok && !gen.drift_detected);
}

void cmd_smallball(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto m = acquire_measure(ctx);
    auto rep = small_ball_probe(m, cfg.deltas, cfg.slack);

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    std::vector<double> ds, ps, bound;
    for (const auto& r : rep.rows) {
        double b = rep.C * r.delta * (1.0 + rep.slack);
        Json row = Json::object();
        row.set("delta", r.delta);
        row.set("probability", r.prob);
        row.set("bound", b);
        rows.push(std::move(row));
        csv.push_back({r.delta, r.prob, b});
        ds.push_back(r.delta);
        ps.push_back(r.prob);
        bound.push_back(std::min(b, 1.0));
    }
    Json j = base_report(ctx);
    j.set("rows", std::move(rows));
    j.set("C", rep.C);
    j.set("slack", rep.slack);
    j.set("pass", rep.pass);
    j.set("inconclusive", rep.inconclusive);
    j.set("degenerate", rep.degenerate);
    j.set("max_ratio", rep.max_ratio);
    put_json(ctx, "smallball.json", j);
    put_csv(ctx, "smallball.csv", {"delta", "probability", "bound"}, csv);

    bool any_positive = false;
    for (double p : ps) any_positive = any_positive || p > 0.0;
    if (any_positive) {
        SvgPlot plot("Small-ball probability", "delta", "mu(B_delta)");
        plot.set_log_x(true);
        plot.set_log_y(true);
        plot.add_line("empirical", ds, ps);
        plot.add_line("linear envelope", ds, bound, /*dashed=*/true);
        put_svg(ctx, "smallball.svg", plot);
    }
    note_check(ctx, "linear_envelope", rep.pass && !rep.degenerate);
}

void cmd_scale(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto gp = cfg.growth_pair();
    auto o = cfg.sde_options();
    auto spec = cfg.noise_spec();
    auto sp = cfg.sample_params();

    std::vector<ScaledRun> runs;
    for (double lam : cfg.scale_lambdas) {
        runs.push_back(scaled_measure_run(basis, o, spec, gp, lam, sp));
        ctx.steps += static_cast<long>((sp.burn_in + sp.stride * static_cast<double>(sp.count)) /
                                       cfg.dt);
        if (!runs.back().measure.valid)
            throw Error("scaled run at lambda=" + fmt_double(lam) +
                        " failed: " + runs.back().measure.error);
    }

    // norm level for the large-data probe: the median at the first budget,
    // advanced like sqrt(lambda) (the amplitude scale of the forcing)
    auto median_hs = [&](const EmpiricalMeasure& m) {
        auto v = m.observable([&](const SpectralField& u) { return sobolev_norm(u, cfg.s); });
        std::sort(v.begin(), v.end());
        return quantile_sorted(v, 0.5);
    };
    double base_level = median_hs(runs.front().measure);
    double base_lambda = runs.front().lambda;

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    std::vector<double> lams, means;
    bool bigness = true;
    for (const auto& r : runs) {
        double level = base_level * std::sqrt(r.lambda / base_lambda);
        double frac = fraction_above(r.measure, cfg.s, level);
        bigness = bigness && frac > 0.0;
        Json row = Json::object();
        row.set("lambda", r.lambda);
        row.set("lambda_truncated", r.lambda_N);
        row.set("amplitude_scale", r.scale);
        row.set("mean_dissipation", r.mean_M);
        row.set("target", r.target_trunc);
        row.set("norm_level", level);
        row.set("fraction_at_level", frac);
        rows.push(std::move(row));
        csv.push_back({r.lambda, r.mean_M, r.target_trunc, level, frac});
        lams.push_back(r.lambda);
        means.push_back(r.mean_M);
    }
    auto fit = linear_fit(lams, means);
    Json j = base_report(ctx);
    j.set("rows", std::move(rows));
    Json fj = Json::object();
    fj.set("slope", fit.slope);
    fj.set("intercept", fit.intercept);
    fj.set("r2", fit.r2);
    j.set("fit", std::move(fj));
    j.set("bigness", bigness);
    put_json(ctx, "scale.json", j);
    put_csv(ctx, "scale.csv",
            {"lambda", "mean_dissipation", "target", "norm_level", "fraction_at_level"}, csv);

    std::vector<double> fit_line(lams.size());
    for (std::size_t i = 0; i < lams.size(); ++i)
        fit_line[i] = fit.intercept + fit.slope * lams[i];
    SvgPlot plot("Dissipation vs noise budget", "lambda", "mean dissipation");
    plot.add_line("sampled", lams, means);
    plot.add_line("linear fit", lams, fit_line, /*dashed=*/true);
    put_svg(ctx, "scale.svg", plot);

    note_check(ctx, "linear_in_budget", fit.r2 >= 0.99);
    note_check(ctx, "large_data_mass", bigness);
}

void cmd_cumulative(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    auto basis = cfg.make_basis();
    auto gp = cfg.growth_pair();
    auto o = cfg.sde_options();
    auto spec = cfg.noise_spec();
    auto sp = cfg.sample_params();

    std::vector<EmpiricalMeasure> parts;
    std::vector<double> lambdas;
    for (double lam : cfg.scale_lambdas) {
        auto run = scaled_measure_run(basis, o, spec, gp, lam, sp);
        ctx.steps += static_cast<long>((sp.burn_in + sp.stride * static_cast<double>(sp.count)) /
                                       cfg.dt);
        if (!run.measure.valid)
            throw Error("component at lambda=" + fmt_double(lam) +
                        " failed: " + run.measure.error);
        parts.push_back(std::move(run.measure));
        lambdas.push_back(lam);
    }
    auto mix = cumulative_measure(parts);
    put_pack(ctx, "cumulative.snlsp", mix);

    // stratified consistency: mixture means must equal the weighted
    // component means exactly (the mixture is a reweighted concatenation)
    double denom = 1.0 - std::pow(0.5, static_cast<double>(parts.size()));
    auto mean_mass = [](const EmpiricalMeasure& m) {
        return m.expectation([](const SpectralField& u) { return l2_norm_sq(u); });
    };
    double stratified = 0.0;
    Json comps = Json::array();
    for (std::size_t n = 0; n < parts.size(); ++n) {
        double w = std::pow(0.5, static_cast<double>(n + 1)) / denom;
        double cm = mean_mass(parts[n]);
        stratified += w * cm;
        Json c = Json::object();
        c.set("lambda", lambdas[n]);
        c.set("weight", w);
        c.set("mean_mass", cm);
        c.set("snapshots", parts[n].size());
        comps.push(std::move(c));
    }
    double mixture_mean = mean_mass(mix);
    double total = 0.0;
    for (double w : mix.weights) total += w;
    bool stratified_ok = std::abs(mixture_mean - stratified) <=
                         1e-12 * (1.0 + std::abs(stratified));

    Json j = base_report(ctx);
    j.set("components", std::move(comps));
    j.set("mixture_mean_mass", mixture_mean);
    j.set("stratified_mean_mass", stratified);
    j.set("total_weight", total);
    j.set("snapshots", mix.size());
    j.set("pack", "cumulative.snlsp");
    put_json(ctx, "cumulative.json", j);

    note_check(ctx, "stratified_means", stratified_ok);
    note_check(ctx, "weights_normalized", std::abs(total - 1.0) <= 1e-12);
}

void cmd_convergence(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.n_list.size() < 3) throw ConfigError("convergence: n_list needs >= 3 cutoffs");
    int refN = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
    auto ref_basis = build_basis(cfg.d, refN);
    RngStream rng(cfg.u0_seed, 0);
    auto u0 = random_field(ref_basis, cfg.conv_decay, rng, cfg.conv_norm, cfg.s);
    auto study = galerkin_convergence_study(u0, cfg.p, cfg.s, cfg.conv_r, cfg.n_list, cfg.conv_T,
                                            cfg.conv_dt);
    for (int N : cfg.n_list)
        ctx.steps += static_cast<long>(cfg.conv_T / cfg.conv_dt) * (N == refN ? 10 : 1);

    Json rows = Json::array();
    std::vector<std::vector<double>> csv;
    std::vector<double> xs, ys;
    bool decreasing = true;
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        const auto& r = study.rows[i];
        Json row = Json::object();
        row.set("N", r.N);
        row.set("lambda_max", r.lambda_max);
        row.set("error", r.error);
        rows.push(std::move(row));
        csv.push_back({static_cast<double>(r.N), r.lambda_max, r.error});
        xs.push_back(1.0 + r.lambda_max);
        ys.push_back(r.error);
        if (i > 0 && r.error >= study.rows[i - 1].error) decreasing = false;
    }
    Json j = base_report(ctx);
    j.set("rows", std::move(rows));
    j.set("slope", study.slope);
    j.set("expected_slope", study.expected);
    j.set("ref_N", study.ref_N);
    j.set("T", study.T);
    put_json(ctx, "convergence.json", j);
    put_csv(ctx, "convergence.csv", {"N", "lambda_max", "error"}, csv);

    std::vector<double> ref_line(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        ref_line[i] = ys.front() * std::pow(xs[i] / xs.front(), study.expected);
    SvgPlot plot("Truncation error vs cutoff", "1 + lambda_max", "sup error");
    plot.set_log_x(true);
    plot.set_log_y(true);
    plot.add_line("measured", xs, ys);
    plot.add_line("expected rate", xs, ref_line, /*dashed=*/true);
    put_svg(ctx, "convergence.svg", plot);

    double tol = 0.25 * std::abs(study.expected);
    note_check(ctx, "error_decreasing", decreasing);
    note_check(ctx, "rate_matches", std::abs(study.slope - study.expected) <= tol);
}

void cmd_oracle(RunCtx& ctx) {
    const auto& cfg = ctx.cfg;
    struct Row {
        std::string name;
        double value;
        double bound;
        bool pass;
    };
    std::vector<Row> rows;
    auto put = [&](const std::string& name, double value, double bound) {
        rows.push_back({name, value, bound, value <= bound});
    };

    {
        auto basis = build_basis(1, 8);
        std::array<int, 3> k{2, 0, 0};
        auto u0 = plane_wave(basis, 0.5, k, 0.0, 7.0);
        auto exact = plane_wave(basis, 0.5, k, 0.25, 7.0);
        IntegrateOptions o;
        o.dt = 1e-4;
        auto strang = integrate_deterministic(u0, 0.25, o);
        put("plane_wave_strang", l2_norm(strang - exact) / l2_norm(exact), 1e-10);
        o.scheme = "exp-rk";
        auto exprk = integrate_deterministic(u0, 0.25, o);
        put("plane_wave_exp_rk", l2_norm(exprk - exact) / l2_norm(exact), 1e-6);
        ctx.steps += 5000;
    }
    {
        auto basis = build_basis(1, 16);
        RngStream rng(5, 1);
        auto u0 = random_field(basis, 2.51, rng, 1.0, 2.0);
        double m0 = mass(u0);
        IntegrateOptions o;
        o.dt = 1e-3;
        double worst = 0.0;
        auto uT = integrate_deterministic(u0, 0.25, o, [&](double, const SpectralField& u) {
            worst = std::max(worst, std::abs(mass(u) - m0) / m0);
        });
        put("mass_conservation", worst, 1e-10);
        auto gauged = integrate_deterministic(u0, 0.25, o);
        o.c0 = 0.0;
        auto ungauged = integrate_deterministic(u0, 0.25, o);
        put("gauge_covariance",
            l2_norm(gauge_transform(ungauged, 0.25, true) - gauged) / l2_norm(gauged), 1e-11);
        ctx.steps += 1000;
    }
    {
        auto basis = cfg.make_basis();
        auto ch = make_channels(basis, cfg.noise_spec());
        double brute = 0.0;
        for (double a : ch.a) brute += 2.0 * a * a;
        put("noise_budget", std::abs(A_sigma_N(ch, 0.0) - brute) / brute, 1e-12);
    }
    {
        double worst = 0.0;
        worst = std::max(worst, std::abs(chi_R(0.5, 1.0) - 1.0));
        worst = std::max(worst, std::abs(chi_R(1.0, 1.0) - 1.0));
        worst = std::max(worst, std::abs(chi_R(2.0, 1.0)));
        worst = std::max(worst, std::abs(chi_R(3.0, 1.0)));
        double mid = chi_R(1.5, 1.0);
        if (!(mid > 0.0 && mid < 1.0)) worst = 1.0;
        put("cutoff_profile", worst, 0.0);
    }
    {
        auto gp = cfg.growth_pair();
        double worst = 0.0;
        for (double y : {0.1, 0.5, 1.0, 2.0, 4.0})
            worst = std::max(worst, std::abs(gp.xi(gp.xi_inv(y)) - y) / y);
        put("growth_inverse", worst, 1e-12);
    }
    {
        // exact discretization composes: stepping dt twice equals stepping 2dt
        double worst = 0.0;
        for (double lam : {0.0, 1.0, 4.0}) {
            double v1 = ou_channel_variance(0.7, lam, 1e-2, 0.5, 2.0);
            double gamma = 0.5 * std::pow(1.0 + lam, 1.0);
            double v2 = v1 * std::exp(-2.0 * gamma * 1e-2) + v1;
            double direct = ou_channel_variance(0.7, lam, 2e-2, 0.5, 2.0);
            worst = std::max(worst, std::abs(v2 - direct) / direct);
        }
        put("ou_variance_composition", worst, 1e-13);
    }
    {
        auto g = sample_bump(0.0, 1.0, 0.5, 2001);
        std::vector<double> xs;
        for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.25) xs.push_back(x);
        auto rr = resolvent_residual(resolvent_phi(g, 1.0), xs);
        put("resolvent_ode", rr.residual, 1e-6);
    }
    {
        put("local_window", std::abs(local_existence_time(1.0, 7.0) - 1.0 / 128.0), 1e-15);
    }

    Json arr = Json::array();
    bool all = true;
    for (const auto& r : rows) {
        Json row = Json::object();
        row.set("name", r.name);
        row.set("value", r.value);
        row.set("bound", r.bound);
        row.set("pass", r.pass);
        arr.push(std::move(row));
        all = all && r.pass;
        std::printf("  oracle %-26s %s (%.3g vs %.3g)\n", r.name.c_str(),
                    r.pass ? "pass" : "FAIL", r.value, r.bound);
    }
    Json j = base_report(ctx);
    j.set("rows", std::move(arr));
    j.set("pass", all);
    put_json(ctx, "oracle.json", j);
    note_check(ctx, "closed_forms", all);
}

// ---------------------------------------------------------------------- run

int run_cli(int argc, char** argv) {
    Cli cli = parse_cli(argc, argv);
    if (cli.sub == "help") {
        std::fputs(USAGE, stdout);
        return 0;
    }

    RunCtx ctx;
    ctx.cli = cli;
    if (!cli.config_path.empty()) {
        if (!std::filesystem::exists(cli.config_path))
            throw ConfigError("config file does not exist: " + cli.config_path);
        ctx.cfg = SimConfig::parse_text(load_text(cli.config_path));
        ctx.inputs.push_back(cli.config_path);
    }
    ctx.cfg.apply_env();
    if (cli.seed_set) {
        ctx.cfg.seeds = {cli.seed};
        ctx.cfg.u0_seed = cli.seed;
    }
    ctx.config_text = ctx.cfg.to_text();
    ctx.run_id = hex64(fnv1a64(cli.sub + "\n" + ctx.config_text));

    std::filesystem::create_directories(cli.out);
    std::printf("snls %s: run %s -> %s\n", cli.sub.c_str(), ctx.run_id.c_str(),
                cli.out.c_str());

    auto t0 = std::chrono::steady_clock::now();
    if (cli.sub == "simulate") cmd_simulate(ctx);
    else if (cli.sub == "sde") cmd_sde(ctx);
    else if (cli.sub == "sample") cmd_sample(ctx);
    else if (cli.sub == "sweep") cmd_sweep(ctx);
    else if (cli.sub == "invariance") cmd_invariance(ctx);
    else if (cli.sub == "sigma") cmd_sigma(ctx);
    else if (cli.sub == "coupling") cmd_coupling(ctx);
    else if (cli.sub == "density") cmd_density(ctx);
    else if (cli.sub == "smallball") cmd_smallball(ctx);
    else if (cli.sub == "scale") cmd_scale(ctx);
    else if (cli.sub == "cumulative") cmd_cumulative(ctx);
    else if (cli.sub == "convergence") cmd_convergence(ctx);
    else if (cli.sub == "oracle") cmd_oracle(ctx);
    else throw ConfigError("unknown subcommand " + cli.sub + " (try --help)");
    auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_manifest(ctx, wall);
    std::printf("wrote %s (%zu artifacts, %.2fs)\n",
                art_path(ctx, "manifest.json").c_str(), ctx.outputs.size() + 1, wall);

    bool enforce = cli.check || cli.sub == "oracle";
    if (!ctx.ok && enforce) return 4;
    return 0;
}

}  // namespace
}  // namespace snls

int main(int argc, char** argv) {
    try {
        return snls::run_cli(argc, argv);
    } catch (const snls::ConfigError& e) {
        std::fprintf(stderr, "snls: %s\n", e.what());
        return 2;
    } catch (const snls::BlowupError& e) {
        std::fprintf(stderr, "snls: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "snls: %s\n", e.what());
        return 1;
    }
}
