// Deterministic flow of the truncated NLS equation on E_N:
//
//     d/dt u = i[(Delta - c0) u - P_N(|u|^{p-1} u)],   c0 in {0,1},
//
// with c0 = 1 for the gauged form used everywhere downstream. Schemes: Strang
// splitting (exact linear phase + exact pointwise rotation) and a Lawson-RK2
// exponential integrator. Also: the Duhamel/Picard local solver with its
// contraction certificate, the Galerkin convergence study, and trajectory
// diagnostics.
#pragma once

#include <functional>
#include <string>

#include "snls/grid.hpp"
#include "snls/growth.hpp"

namespace snls {

struct IntegrateOptions {
    double dt = 1e-3;
    double p = 7.0;
    std::string scheme = "strang";  // "strang" | "exp-rk"
    double c0 = 1.0;                // mass term in the linear phase
    int oversample = 2;
    double blowup_threshold = 1e8;  // H^s_check norm trigger
    double s_check = 2.0;
    int record_stride = 0;          // 0: record only diagnostics the driver asks for
};

namespace detail {

inline double amp_pow(double a2, double p) {
    // |v|^{p-1} from |v|^2, integer fast path for odd p
    double h = (p - 1.0) / 2.0;
    if (h == std::floor(h)) {
        double r = 1.0;
        for (int i = 0; i < static_cast<int>(h); ++i) r *= a2;
        return r;
    }
    return std::pow(a2, h);
}

}  // namespace detail

// Nonlinear substep: exact solve of u_t = -i |u|^{p-1} u pointwise on the
// grid (|u| is invariant), then projection back to the band.
inline void substep_rotate(SpectralField& u, double h, double p, const CollocationGrid& grid) {
    auto g = grid.to_grid(u);
    for (auto& v : g) {
        double theta = -h * detail::amp_pow(std::norm(v), p);
        v *= cplx(std::cos(theta), std::sin(theta));
    }
    u = grid.from_grid(std::move(g));
}

// Linear substep: exact diagonal phase, optionally with the (1-Delta)^{s-1}
// damping factor used by the stochastic integrator (alpha = 0 here).
inline void substep_linear(SpectralField& u, double h, double c0,
                           double alpha = 0.0, double s = 0.0) {
    for (std::size_t m = 0; m < u.c.size(); ++m)
        u.c[m] *= linear_phase_factor(u.basis->lambda(m), h, c0, alpha, s);
}

inline void check_blowup(const SpectralField& u, double t, const IntegrateOptions& o) {
    double n = sobolev_norm(u, o.s_check);
    if (!std::isfinite(n) || n > o.blowup_threshold) throw BlowupError(t, n);
}

inline void step_strang(SpectralField& u, double dt, const CollocationGrid& grid,
                        const IntegrateOptions& o) {
    substep_rotate(u, 0.5 * dt, o.p, grid);
    substep_linear(u, dt, o.c0);
    substep_rotate(u, 0.5 * dt, o.p, grid);
}

// Lawson-RK2: midpoint rule in the interaction picture.
inline void step_exprk2(SpectralField& u, double dt, const CollocationGrid& grid,
                        const IntegrateOptions& o) {
    auto N = [&](const SpectralField& w) {
        SpectralField n = grid.nonlinearity(w, o.p);
        n *= cplx(0.0, -1.0);
        return n;
    };
    SpectralField k1 = N(u);
    SpectralField v = u;
    axpy(cplx(0.5 * dt, 0.0), k1, v);
    substep_linear(v, 0.5 * dt, o.c0);
    SpectralField k2 = N(v);
    substep_linear(u, dt, o.c0);
    substep_linear(k2, 0.5 * dt, o.c0);
    axpy(cplx(dt, 0.0), k2, u);
}

inline void deterministic_step(SpectralField& u, double dt, const CollocationGrid& grid,
                               const IntegrateOptions& o) {
    if (o.scheme == "strang") step_strang(u, dt, grid, o);
    else if (o.scheme == "exp-rk") step_exprk2(u, dt, grid, o);
    else throw ConfigError("unknown scheme: " + o.scheme);
}

// Step callback gets (t, u) after every step; t=0 fires before the first.
using StepCallback = std::function<void(double, const SpectralField&)>;

inline SpectralField integrate_deterministic(const SpectralField& u0, double T,
                                             const IntegrateOptions& o,
                                             const StepCallback& cb = {}) {
    if (T < 0.0 || o.dt <= 0.0) throw ConfigError("integrate: T >= 0 and dt > 0 required");
    CollocationGrid grid(u0.basis, o.oversample);
    SpectralField u = u0;
    if (cb) cb(0.0, u);
    if (T == 0.0) return u;
    auto n = static_cast<std::size_t>(std::ceil(T / o.dt - 1e-9));
    double dt = T / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        deterministic_step(u, dt, grid, o);
        double t = static_cast<double>(i) * dt;
        check_blowup(u, t, o);
        if (cb) cb(t, u);
    }
    return u;
}

// ------------------------------------------------------------------
// Closed-form plane wave: u(t,x) = c e^{i k.x - i omega t} solves the gauged
// equation with omega = c0 + |k|^2 + |c|^{p-1}.
inline double plane_wave_omega(double c, double k2, double p, double c0 = 1.0) {
    return c0 + k2 + std::pow(std::abs(c), p - 1.0);
}

inline SpectralField plane_wave(const BasisPtr& basis, cplx c, const std::array<int, 3>& k,
                                double t = 0.0, double p = 7.0, double c0 = 1.0) {
    SpectralField u(basis);
    double k2 = 0.0;
    for (int i = 0; i < basis->d; ++i) k2 += sq(static_cast<double>(k[i]));
    bool found = false;
    for (std::size_t m = 0; m < basis->size(); ++m) {
        if (basis->modes[m].k == k) {
            double om = plane_wave_omega(std::abs(c), k2, p, c0);
            u.c[m] = c * std::pow(TWO_PI, 0.5 * basis->d) * std::exp(cplx(0.0, -om * t));
            found = true;
            break;
        }
    }
    if (!found) throw Error("plane_wave: k outside basis");
    return u;
}

// ------------------------------------------------------------------
// T(R) = 1 / (2^7 R^{p-1} c): the window on which the Duhamel map contracts
// with factor <= 1/2 on the ball of radius 2R.
inline double local_existence_time(double R, double p, double c = 1.0) {
    if (R <= 0.0 || p <= 1.0 || c <= 0.0)
        throw Error("local_existence_time: need R > 0, p > 1, c > 0");
    return 1.0 / (128.0 * std::pow(R, p - 1.0) * c);
}

struct PicardResult {
    std::vector<double> times;
    std::vector<SpectralField> solution;   // fixed point on the time grid
    std::vector<double> distances;         // sup-in-time H^s iterate distances
    std::vector<double> contraction;       // distances[k+1]/distances[k]
    double sup_norm = 0.0;                 // sup_t ||u||_s over the window
    double initial_norm = 0.0;
    bool certificate = false;              // sup_norm <= 2 ||u0||_s
    int iterations = 0;
    bool converged = false;
};

// Picard iteration for the Duhamel form
//   u(t) = S(t) u0 - i int_0^t S(t - tau) P_N(|u|^{p-1} u)(tau) dtau
// on a uniform time grid with trapezoid quadrature. Using W = S(-tau) w(tau)
// turns the convolution into S(t) cumtrapz(W), one propagator per node.
inline PicardResult picard_local_solve(const SpectralField& u0, double p, double s, double T,
                                       int nodes = 65, int max_iter = 40, double tol = 1e-13,
                                       int oversample = 2, double c_const = 1.0) {
    if (nodes < 3) throw Error("picard_local_solve: need at least 3 nodes");
    double R = sobolev_norm(u0, s);
    double window = local_existence_time(R, p, c_const);
    if (T > window * (1.0 + 1e-12))
        throw Error("picard_local_solve: T exceeds the certified window " + fmt_double(window));

    CollocationGrid grid(u0.basis, oversample);
    PicardResult res;
    res.initial_norm = R;
    double h = T / (nodes - 1);
    res.times.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) res.times[static_cast<std::size_t>(i)] = h * i;

    // iterate 0: free flow
    std::vector<SpectralField> cur(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
        cur[static_cast<std::size_t>(i)] = linear_propagator(u0, res.times[static_cast<std::size_t>(i)]);

    std::vector<SpectralField> w(static_cast<std::size_t>(nodes));
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i < nodes; ++i) {
            w[static_cast<std::size_t>(i)] =
                linear_propagator(grid.nonlinearity(cur[static_cast<std::size_t>(i)], p),
                                  -res.times[static_cast<std::size_t>(i)]);
        }
        std::vector<SpectralField> next(static_cast<std::size_t>(nodes));
        SpectralField acc(u0.basis);  // cumulative trapezoid of W
        for (int i = 0; i < nodes; ++i) {
            if (i > 0) {
                axpy(cplx(0.5 * h, 0.0), w[static_cast<std::size_t>(i - 1)], acc);
                axpy(cplx(0.5 * h, 0.0), w[static_cast<std::size_t>(i)], acc);
            }
            SpectralField inner_term = u0;
            axpy(cplx(0.0, -1.0), acc, inner_term);
            next[static_cast<std::size_t>(i)] =
                linear_propagator(inner_term, res.times[static_cast<std::size_t>(i)]);
        }
        double dist = 0.0;
        for (int i = 0; i < nodes; ++i)
            dist = std::max(dist, sobolev_norm(next[static_cast<std::size_t>(i)] -
                                               cur[static_cast<std::size_t>(i)], s));
        res.distances.push_back(dist);
        cur = std::move(next);
        res.iterations = it + 1;
        if (dist <= tol * std::max(1.0, R)) {
            res.converged = true;
            break;
        }
    }
    for (std::size_t k = 1; k < res.distances.size(); ++k)
        if (res.distances[k - 1] > 0.0)
            res.contraction.push_back(res.distances[k] / res.distances[k - 1]);
    double sup = 0.0;
    for (const auto& f : cur) sup = std::max(sup, sobolev_norm(f, s));
    res.sup_norm = sup;
    res.certificate = sup <= 2.0 * R * (1.0 + 1e-12);
    res.solution = std::move(cur);
    return res;
}

// ------------------------------------------------------------------
struct ConvergenceRow {
    int N = 0;
    double lambda_max = 0.0;
    double error = 0.0;  // sup_t ||u_ref - u_N||_r
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;           // d ln err / d ln(1+lambda_max)
    double expected = 0.0;        // (r - s)/2
    double T = 0.0;
    int ref_N = 0;
};

// Truncation error against the largest-N reference run at dt/ref_dt_factor.
// u0 must live on the reference basis; each run starts from P_N u0.
inline ConvergenceStudy galerkin_convergence_study(const SpectralField& u0, double p, double s,
                                                   double r, const std::vector<int>& N_list,
                                                   double T, double dt,
                                                   double ref_dt_factor = 0.1) {
    if (N_list.size() < 3) throw Error("convergence study: need at least 3 cutoffs");
    std::vector<int> Ns = N_list;
    std::sort(Ns.begin(), Ns.end());
    int refN = Ns.back();

    auto ref_basis = build_basis(u0.basis->d, refN, u0.basis->full_shell);
    auto u0_ref = rebase(u0, ref_basis);

    IntegrateOptions opt;
    opt.p = p;
    opt.dt = dt * ref_dt_factor;
    std::vector<SpectralField> ref_states;
    std::vector<double> sample_times;
    {
        auto nsteps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
        sample_times.resize(nsteps + 1);
        for (std::size_t i = 0; i <= nsteps; ++i)
            sample_times[i] = T * static_cast<double>(i) / static_cast<double>(nsteps);
    }
    {
        std::size_t next = 0;
        integrate_deterministic(u0_ref, T, opt, [&](double t, const SpectralField& u) {
            if (next < sample_times.size() && t >= sample_times[next] - 1e-12) {
                ref_states.push_back(u);
                ++next;
            }
        });
    }

    ConvergenceStudy study;
    study.T = T;
    study.ref_N = refN;
    study.expected = 0.5 * (r - s);
    IntegrateOptions run_opt = opt;
    run_opt.dt = dt;
    for (std::size_t ni = 0; ni + 1 < Ns.size(); ++ni) {
        auto basis_n = build_basis(u0.basis->d, Ns[ni], u0.basis->full_shell);
        auto u0_n = rebase(u0_ref, basis_n);
        double err = 0.0;
        std::size_t idx = 0;
        integrate_deterministic(u0_n, T, run_opt, [&](double, const SpectralField& u) {
            auto diff = ref_states[idx] - rebase(u, ref_basis);
            err = std::max(err, sobolev_norm(diff, r));
            ++idx;
        });
        study.rows.push_back({Ns[ni], basis_n->max_lambda(), err});
    }

    // log-log slope in (1 + lambda_max)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto n = static_cast<double>(study.rows.size());
    for (const auto& row : study.rows) {
        double x = std::log(1.0 + row.lambda_max), y = std::log(row.error);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    study.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return study;
}

// ------------------------------------------------------------------
// Trapezoid integral of the recorded sup-norm samples.
inline double linfty_integral(const std::vector<double>& times, const std::vector<double>& linf) {
    if (times.size() != linf.size() || times.size() < 2)
        throw Error("linfty_integral: need matched samples");
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
        acc += 0.5 * (linf[i] + linf[i - 1]) * (times[i] - times[i - 1]);
    return acc;
}

struct GrowthReport {
    double sup_ratio = 0.0;
    double argmax_t = 0.0;
    bool within_envelope = false;  // sup_ratio <= 2
};

// sup_t ||u(t)||_r / xi(1 + i + ln(1+t)) along recorded norm samples.
inline GrowthReport growth_tracker(const std::vector<double>& times,
                                   const std::vector<double>& norms_r,
                                   const GrowthPair& gp, double i_level) {
    if (times.size() != norms_r.size() || times.empty())
        throw Error("growth_tracker: need matched samples");
    GrowthReport rep;
    for (std::size_t j = 0; j < times.size(); ++j) {
        double env = gp.xi(1.0 + i_level + std::log1p(times[j]));
        double ratio = norms_r[j] / env;
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.argmax_t = times[j];
        }
    }
    rep.within_envelope = rep.sup_ratio <= 2.0;
    return rep;
}

}  // namespace snls
