// Empirical measures: long-run sampling of the damped-driven dynamics,
// stationary-identity reports, inviscid sweeps, coupling and invariance
// checks, and the restricted / scaled / cumulative constructions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snls/balance.hpp"
#include "snls/dynamics.hpp"
#include "snls/io.hpp"
#include "snls/sde.hpp"
#include "snls/stats.hpp"

namespace snls {

struct MeasureProvenance {
    double alpha = 0.0;
    double burn_in = 0.0;
    double stride = 0.0;
    double dt = 0.0;
    std::vector<std::uint64_t> seeds;
    std::string parent;  // operation chain that produced the measure
};

struct EmpiricalMeasure {
    BasisPtr basis;
    std::vector<SpectralField> snaps;
    std::vector<double> weights;  // nonnegative, sum to 1
    MeasureProvenance meta;
    bool valid = true;
    std::string error;

    std::size_t size() const { return snaps.size(); }

    void normalize() {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw Error("measure weight < 0");
            total += w;
        }
        if (total <= 0.0) throw Error("measure has no mass");
        for (double& w : weights) w /= total;
    }

    template <class F>
    double expectation(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < snaps.size(); ++i) acc += weights[i] * f(snaps[i]);
        return acc;
    }

    template <class F>
    std::vector<double> observable(F&& f) const {
        std::vector<double> v(snaps.size());
        for (std::size_t i = 0; i < snaps.size(); ++i) v[i] = f(snaps[i]);
        return v;
    }
};

inline void save_measure_pack(const std::string& path, const EmpiricalMeasure& m,
                              const FieldHeader& h) {
    save_pack(path, m.snaps, m.weights, h);
}

inline EmpiricalMeasure load_measure_pack(const std::string& path, FieldHeader* hdr = nullptr) {
    EmpiricalMeasure m;
    FieldHeader h;
    load_pack(path, m.snaps, m.weights, &h);
    m.basis = m.snaps.empty() ? build_basis(h.d, h.N) : m.snaps.front().basis;
    m.meta.parent = "pack:" + path;
    if (hdr) *hdr = h;
    return m;
}

struct SampleParams {
    double burn_in = 20.0;
    double stride = 2.0;
    std::size_t count = 200;                  // total snapshots over all chains
    std::vector<std::uint64_t> seeds = {1};   // one chain per seed
};

// Time-average sampling of the stochastic flow started at 0: snapshots every
// stride after burn_in, chains merged with uniform weights. A blow-up stops
// the affected chain and marks the measure invalid (partial data retained).
inline EmpiricalMeasure krylov_bogoliubov_sample(const BasisPtr& basis, const SdeOptions& o,
                                                 const NoiseChannels& ch, const GrowthPair& gp,
                                                 const SampleParams& sp) {
    if (sp.burn_in <= 0.0 || sp.stride <= 0.0)
        throw ConfigError("krylov_bogoliubov_sample: burn_in and stride must be > 0");
    if (sp.count == 0 || sp.seeds.empty())
        throw ConfigError("krylov_bogoliubov_sample: need count > 0 and at least one seed");
    EmpiricalMeasure m;
    m.basis = basis;
    m.meta = {o.alpha, sp.burn_in, sp.stride, o.dt, sp.seeds, "krylov_bogoliubov_sample"};
    std::size_t chains = sp.seeds.size();
    for (std::size_t c = 0; c < chains; ++c) {
        std::size_t quota = sp.count / chains + (c < sp.count % chains ? 1 : 0);
        if (quota == 0) continue;
        double T = sp.burn_in + static_cast<double>(quota) * sp.stride;
        SpectralField u0(basis);
        RngStream rng(sp.seeds[c], 0);
        std::size_t taken = 0;
        double next = sp.burn_in + sp.stride;
        try {
            sde_integrate(u0, T, o, ch, gp, rng, [&](double t, const SpectralField& u) {
                if (taken < quota && t >= next - 0.5 * o.dt) {
                    m.snaps.push_back(u);
                    ++taken;
                    next += sp.stride;
                }
            });
        } catch (const BlowupError& e) {
            m.valid = false;
            m.error = "chain seed " + std::to_string(sp.seeds[c]) + " blew up at t=" +
                      fmt_double(e.time) + " (norm " + fmt_double(e.norm) + ")";
            break;
        }
    }
    if (!m.snaps.empty()) {
        m.weights.assign(m.snaps.size(), 1.0);
        m.normalize();
    }
    return m;
}

struct StationaryReport {
    double mean_M = 0.0;   // sampled average of the mass-dissipation functional
    double target = 0.0;   // A_{0,N}/2
    double rel_err = 0.0;
    Ci ci;                 // bootstrap CI for mean_M
    bool mean_ok = false;  // within 10% and CI straddles the target
    double mean_E = 0.0;
    double exp_moment = 0.0;  // average of e^{rho(||u||_{s-eps})}
    bool exp_saturated = false;
    std::vector<double> tail_R;
    std::vector<double> tail_value;  // E[ M-functional * (1 - chi_R(||u||^2)) ]
    double tail_slope = 0.0;
    int tail_positive = 0;
    bool tail_ok = false;
};

inline StationaryReport stationary_report(const EmpiricalMeasure& m, double A0N,
                                          const SdeOptions& o, const GrowthPair& gp,
                                          std::vector<double> R_list = {1.0, 2.0, 4.0, 8.0}) {
    if (m.snaps.empty()) throw Error("stationary_report: empty measure");
    StationaryReport rep;
    rep.target = 0.5 * A0N;
    rep.tail_R = std::move(R_list);

    CollocationGrid grid(m.basis, o.oversample);
    std::vector<double> Ms(m.size()), mass(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto dm = dissipation_M(m.snaps[i], o.s, o.eps, gp, o.squared_rho_arg);
        Ms[i] = dm.value;
        mass[i] = l2_norm_sq(m.snaps[i]);
        rep.mean_M += m.weights[i] * dm.value;
        rep.mean_E += m.weights[i] *
                      dissipation_E(m.snaps[i], o.s, o.eps, gp, o.p, grid, o.squared_rho_arg).value;
        double lw = dm.log_weight;
        if (lw >= EXP_SATURATION) rep.exp_saturated = true;
        rep.exp_moment += m.weights[i] * std::exp(std::min(lw, EXP_SATURATION));
    }
    rep.rel_err = rep.target > 0.0 ? std::abs(rep.mean_M - rep.target) / rep.target : rep.mean_M;
    // bootstrap over snapshots; sampled measures are uniform so the plain
    // mean CI applies
    rep.ci = bootstrap_mean_ci(Ms);
    rep.mean_ok = rep.rel_err <= 0.10 && rep.ci.contains(rep.target);

    for (double R : rep.tail_R) {
        double v = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            v += m.weights[i] * Ms[i] * (1.0 - chi_R(mass[i], R));
        rep.tail_value.push_back(v);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.tail_value.size(); ++i)
        if (rep.tail_value[i] > rep.tail_value[i - 1] + 1e-15) decreasing = false;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < rep.tail_R.size(); ++i)
        if (rep.tail_value[i] > 0.0) {
            xs.push_back(rep.tail_R[i]);
            ys.push_back(rep.tail_value[i]);
        }
    rep.tail_positive = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        rep.tail_slope = loglog_slope(xs, ys).slope;
        rep.tail_ok = decreasing && rep.tail_slope <= -0.8;
    } else {
        // tail already identically ~0: steeper than any finite slope
        rep.tail_slope = -INFINITY;
        rep.tail_ok = decreasing;
    }
    return rep;
}

struct SweepRow {
    double alpha = 0.0;
    double mean_M = 0.0;
    Ci ci_M;
    double target = 0.0;  // A_{0,N}/2, alpha-independent
    double mean_mass = 0.0;
    double mean_Hs = 0.0;
    double mean_E = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::vector<EmpiricalMeasure> measures;
    bool pinned = false;      // every row within 10% of the shared target
    bool continuous = false;  // no order-of-magnitude jump between neighbours
};

// Decreasing-alpha sweep; burn-in and stride scale like 1/alpha (the damping
// sets the mixing clock).
inline SweepReport inviscid_sweep(const BasisPtr& basis, SdeOptions base,
                                  const NoiseChannels& ch, const GrowthPair& gp,
                                  const std::vector<double>& alphas, double burn_base = 10.0,
                                  double stride_base = 1.0, std::size_t count = 200,
                                  const std::vector<std::uint64_t>& seeds = {1, 2}) {
    if (alphas.empty()) throw ConfigError("inviscid_sweep: empty alpha list");
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (!(alphas[i] < alphas[i - 1])) throw ConfigError("inviscid_sweep: alphas must decrease");
    if (alphas.back() <= 0.0) throw ConfigError("inviscid_sweep: alphas must be > 0");

    SweepReport rep;
    CollocationGrid grid(basis, base.oversample);
    for (double alpha : alphas) {
        SdeOptions o = base;
        o.alpha = alpha;
        SampleParams sp;
        sp.burn_in = burn_base / alpha;
        sp.stride = stride_base / alpha;
        sp.count = count;
        sp.seeds = seeds;
        auto m = krylov_bogoliubov_sample(basis, o, ch, gp, sp);
        SweepRow row;
        row.alpha = alpha;
        row.target = 0.5 * A_sigma_N(ch, 0.0);
        auto Ms = m.observable([&](const SpectralField& u) {
            return dissipation_M(u, o.s, o.eps, gp, o.squared_rho_arg).value;
        });
        row.mean_M = mean(Ms);
        row.ci_M = bootstrap_mean_ci(Ms);
        row.mean_mass = m.expectation([](const SpectralField& u) { return l2_norm_sq(u); });
        row.mean_Hs = m.expectation([&](const SpectralField& u) { return sobolev_norm(u, o.s); });
        row.mean_E = m.expectation([&](const SpectralField& u) { return grid.energy(u, o.p); });
        rep.rows.push_back(row);
        rep.measures.push_back(std::move(m));
    }
    rep.pinned = true;
    for (const auto& r : rep.rows)
        if (r.target > 0.0 && std::abs(r.mean_M - r.target) > 0.1 * r.target) rep.pinned = false;
    rep.continuous = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        auto jumpy = [](double a, double b) {
            double lo = std::min(std::abs(a), std::abs(b));
            double hi = std::max(std::abs(a), std::abs(b));
            return lo > 1e-12 && hi / lo > 10.0;
        };
        if (jumpy(rep.rows[i].mean_mass, rep.rows[i - 1].mean_mass) ||
            jumpy(rep.rows[i].mean_Hs, rep.rows[i - 1].mean_Hs) ||
            jumpy(rep.rows[i].mean_E, rep.rows[i - 1].mean_E))
            rep.continuous = false;
    }
    return rep;
}

struct CouplingRow {
    double alpha = 0.0;
    double error = 0.0;       // E[ ||flow - stochastic||_{L^2} ; kept event ]
    double event_prob = 0.0;  // P(sup ||z||, ||martingale|| <= r sqrt(alpha) T)
};

struct CouplingReport {
    std::vector<CouplingRow> rows;
    double t = 0.0;
    double r_cut = 0.0;
    bool decreasing = false;  // error monotone along the (decreasing) alpha list
};

// Pathwise comparison of the undamped flow against the damped-driven dynamics
// with shared initial data and paired noise seeds across alpha values. The
// kept event bounds the stochastic convolution z and the running noise sum.
inline CouplingReport coupling_study(const SpectralField& u0, const std::vector<double>& alphas,
                                     double T, double r_cut, const SdeOptions& base,
                                     const NoiseChannels& ch, const GrowthPair& gp,
                                     std::size_t paths, std::uint64_t seed) {
    if (paths == 0) throw ConfigError("coupling_study: paths must be > 0");
    if (!u0.basis->same_layout(*ch.basis)) throw Error("coupling_study: basis mismatch");
    CouplingReport rep;
    rep.t = T;
    rep.r_cut = r_cut;
    CollocationGrid grid(u0.basis, base.oversample);

    IntegrateOptions det;
    det.dt = base.dt;
    det.p = base.p;
    det.c0 = base.c0;
    det.oversample = base.oversample;
    auto ref = integrate_deterministic(u0, T, det);

    auto n = static_cast<std::size_t>(std::ceil(T / base.dt - 1e-9));
    double dt = T / static_cast<double>(n);
    for (double alpha : alphas) {
        SdeOptions o = base;
        o.alpha = alpha;
        double err_acc = 0.0;
        double kept = 0.0;
        double bound = r_cut * std::sqrt(alpha) * T;
        for (std::size_t pth = 0; pth < paths; ++pth) {
            RngStream rng(seed, pth);  // same stream per path across alpha
            SpectralField u = u0;
            SpectralField z(u0.basis), mart(u0.basis);
            double sup_zm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto eta = ou_noise_draw(ch, dt, alpha, o.s, rng);
                sde_step_given_noise(u, dt, o, gp, eta, grid);
                ou_apply(z, dt, alpha, o.s, eta, o.c0);
                if (!eta.empty())
                    for (std::size_t mm = 0; mm < mart.c.size(); ++mm) mart.c[mm] += eta[mm];
                sup_zm = std::max(sup_zm, std::max(l2_norm(z), l2_norm(mart)));
            }
            bool event = alpha == 0.0 ? true : sup_zm <= bound;
            if (event) {
                kept += 1.0;
                err_acc += l2_norm(u - ref);
            }
        }
        CouplingRow row;
        row.alpha = alpha;
        row.error = err_acc / static_cast<double>(paths);
        row.event_prob = kept / static_cast<double>(paths);
        rep.rows.push_back(row);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].error > rep.rows[i - 1].error) rep.decreasing = false;
    return rep;
}

struct ObservableRow {
    std::string name;
    double ks = 0.0;
    double pvalue = 1.0;
    double mean_pre = 0.0, mean_post = 0.0;
    double var_pre = 0.0, var_post = 0.0;
};

struct InvarianceReport {
    std::vector<ObservableRow> rows;
    double t = 0.0;
    double max_ks = 0.0;
    double p_threshold = 0.0;  // 0.01 Bonferroni-split across observables
    bool pass = false;
};

// Push every snapshot through the undamped flow for time t and compare the
// pre/post laws of scalar observables. Snapshots are treated as equal-weight
// sample points (sampled measures are uniform).
inline InvarianceReport invariance_test(const EmpiricalMeasure& m, double t,
                                        const IntegrateOptions& io) {
    if (m.snaps.empty()) throw Error("invariance_test: empty measure");
    CollocationGrid grid(m.basis, io.oversample);
    std::size_t low1 = 0, low2 = 0;
    for (std::size_t i = 0; i < m.basis->size(); ++i) {
        double lam = m.basis->modes[i].lambda;
        if (lam == 0.0) low1 = i;
    }
    double best = INFINITY;
    for (std::size_t i = 0; i < m.basis->size(); ++i) {
        double lam = m.basis->modes[i].lambda;
        if (lam > 0.0 && lam < best) {
            best = lam;
            low2 = i;
        }
    }
    std::vector<std::pair<std::string, std::function<double(const SpectralField&)>>> obs = {
        {"mass", [](const SpectralField& u) { return l2_norm_sq(u); }},
        {"energy", [&](const SpectralField& u) { return grid.energy(u, io.p); }},
        {"hs_norm", [&](const SpectralField& u) { return sobolev_norm(u, io.s_check); }},
        {"re_zero_mode", [=](const SpectralField& u) { return u.c[low1].real(); }},
        {"im_zero_mode", [=](const SpectralField& u) { return u.c[low1].imag(); }},
        {"re_low_mode", [=](const SpectralField& u) { return u.c[low2].real(); }},
        {"im_low_mode", [=](const SpectralField& u) { return u.c[low2].imag(); }},
    };

    std::vector<SpectralField> pushed;
    pushed.reserve(m.size());
    for (const auto& u : m.snaps) pushed.push_back(integrate_deterministic(u, t, io));

    InvarianceReport rep;
    rep.t = t;
    rep.p_threshold = 0.01 / static_cast<double>(obs.size());
    rep.pass = true;
    for (auto& [name, f] : obs) {
        std::vector<double> pre(m.size()), post(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            pre[i] = f(m.snaps[i]);
            post[i] = f(pushed[i]);
        }
        ObservableRow row;
        row.name = name;
        row.ks = ks_statistic(pre, post);
        row.pvalue = ks_pvalue(row.ks, pre.size(), post.size());
        row.mean_pre = mean(pre);
        row.mean_post = mean(post);
        row.var_pre = variance(pre);
        row.var_post = variance(post);
        rep.max_ks = std::max(rep.max_ks, row.ks);
        if (row.pvalue <= rep.p_threshold) rep.pass = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

template <class Pred>
inline EmpiricalMeasure restrict_measure(const EmpiricalMeasure& m, Pred&& keep) {
    EmpiricalMeasure out;
    out.basis = m.basis;
    out.meta = m.meta;
    out.meta.parent += "|restrict";
    out.valid = m.valid;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (keep(m.snaps[i])) {
            out.snaps.push_back(m.snaps[i]);
            out.weights.push_back(m.weights[i]);
        }
    }
    if (out.snaps.empty()) throw Error("restrict_measure: empty restriction");
    out.normalize();
    return out;
}

struct ScaledRun {
    EmpiricalMeasure measure;
    double lambda = 0.0;         // requested noise budget
    double scale = 1.0;          // applied amplitude factor sqrt(lambda / A0_full)
    double lambda_N = 0.0;       // truncated budget after scaling
    double mean_M = 0.0;
    double target_full = 0.0;    // lambda itself
    double target_trunc = 0.0;   // lambda_N / 2 from the balance identity
};

inline NoiseChannels scaled_channels(const BasisPtr& basis, const NoiseSpec& spec,
                                     double lambda) {
    if (lambda <= 0.0) throw ConfigError("scaled_channels: lambda must be > 0");
    double A0 = A_sigma_full_cached(basis->d, spec.s, 0.0).value;
    double scale = std::sqrt(lambda / A0);
    auto ch = make_channels(basis, spec);
    for (double& a : ch.a) a *= scale;
    ch.A0N *= lambda / A0;
    return ch;
}

// Rerun sampling with amplitudes rescaled to a total noise budget lambda.
// lambda = A0_full leaves the channels bitwise unchanged.
inline ScaledRun scaled_measure_run(const BasisPtr& basis, const SdeOptions& o,
                                    const NoiseSpec& spec, const GrowthPair& gp, double lambda,
                                    const SampleParams& sp) {
    ScaledRun run;
    run.lambda = lambda;
    double A0 = A_sigma_full_cached(basis->d, spec.s, 0.0).value;
    run.scale = std::sqrt(lambda / A0);
    auto ch = scaled_channels(basis, spec, lambda);
    run.lambda_N = A_sigma_N(ch, 0.0);
    run.measure = krylov_bogoliubov_sample(basis, o, ch, gp, sp);
    run.measure.meta.parent = "scaled_measure_run";
    run.mean_M = run.measure.expectation([&](const SpectralField& u) {
        return dissipation_M(u, o.s, o.eps, gp, o.squared_rho_arg).value;
    });
    run.target_full = lambda;
    run.target_trunc = 0.5 * run.lambda_N;
    return run;
}

inline double fraction_above(const EmpiricalMeasure& m, double s, double level) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (sobolev_norm(m.snaps[i], s) >= level) acc += m.weights[i];
    return acc;
}

// Geometric mixture 2^{-n} over the component list, renormalized over the
// truncation: one component gets weight 1, two get 2/3 and 1/3.
inline EmpiricalMeasure cumulative_measure(const std::vector<EmpiricalMeasure>& parts) {
    if (parts.empty()) throw ConfigError("cumulative_measure: no components");
    EmpiricalMeasure out;
    out.basis = parts.front().basis;
    out.meta.parent = "cumulative_measure";
    double denom = 1.0 - std::pow(0.5, static_cast<double>(parts.size()));
    for (std::size_t nidx = 0; nidx < parts.size(); ++nidx) {
        const auto& part = parts[nidx];
        if (!part.basis->same_layout(*out.basis))
            throw Error("cumulative_measure: component basis mismatch");
        double wn = std::pow(0.5, static_cast<double>(nidx + 1)) / denom;
        for (std::size_t i = 0; i < part.size(); ++i) {
            out.snaps.push_back(part.snaps[i]);
            out.weights.push_back(wn * part.weights[i]);
        }
        out.valid = out.valid && part.valid;
    }
    out.normalize();
    return out;
}

}  // namespace snls
