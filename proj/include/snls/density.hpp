// Distributional analysis of the conserved quantities under sampled measures:
// observable histograms with atom detection, noise-direction quadratic
// variations, the resolvent test function with its ODE residual, a generator
// stationarity surrogate, and small-ball probabilities.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snls/measure.hpp"

namespace snls {

constexpr double ATOM_MASS_THRESHOLD = 1e-3;

struct Atom {
    double value = 0.0;
    double mass = 0.0;
};

// Law of a scalar observable under an empirical measure. Histogram masses sum
// to the measure's total weight (1 after normalization); edges are strictly
// increasing even when every sample coincides.
struct ObservableDistribution {
    std::string tag;
    std::vector<double> values;   // per snapshot, measure order
    std::vector<double> weights;  // normalized
    std::vector<double> edges;    // bins+1
    std::vector<double> masses;   // per bin
    double bandwidth = 0.0;       // Silverman rule; 0 when the spread degenerates
    std::vector<Atom> atoms;      // exactly repeated values carrying mass > ATOM_MASS_THRESHOLD

    double total_mass() const {
        double s = 0.0;
        for (double m : masses) s += m;
        return s;
    }
    bool atom_at_zero() const {
        for (const auto& a : atoms)
            if (a.value == 0.0) return true;
        return false;
    }
    // sup of mass/width over bins disjoint from [-a, a]; 0 if no such bin
    double max_density_outside(double a) const {
        double best = 0.0;
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            if (edges[b] < a && edges[b + 1] > -a) continue;
            double w = edges[b + 1] - edges[b];
            if (w > 0.0) best = std::max(best, masses[b] / w);
        }
        return best;
    }
    // weighted Gaussian KDE at bandwidth*h_scale (robustness probes use 1/2, 2)
    double kde(double x, double h_scale = 1.0) const {
        double h = bandwidth * h_scale;
        if (h <= 0.0) throw Error("kde: degenerate bandwidth");
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            acc += weights[i] * std::exp(-0.5 * sq((x - values[i]) / h));
        return acc / (h * std::sqrt(TWO_PI));
    }
};

template <class F>
inline ObservableDistribution distribution_of(const EmpiricalMeasure& m, F&& f, std::string tag,
                                              int nbins = 32) {
    if (m.snaps.empty()) throw Error("distribution_of: empty measure");
    if (nbins < 1) throw ConfigError("distribution_of: nbins must be >= 1");
    ObservableDistribution d;
    d.tag = std::move(tag);
    d.values.reserve(m.size());
    for (const auto& u : m.snaps) d.values.push_back(f(u));
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    if (wsum <= 0.0) throw Error("distribution_of: zero total weight");
    d.weights.reserve(m.size());
    for (double w : m.weights) d.weights.push_back(w / wsum);

    double lo = *std::min_element(d.values.begin(), d.values.end());
    double hi = *std::max_element(d.values.begin(), d.values.end());
    if (!(hi > lo)) {  // point mass: widen artificially so edges stay increasing
        double pad = 0.5 * (1.0 + std::abs(lo));
        lo -= pad;
        hi += pad;
    }
    double width = (hi - lo) / nbins;
    d.edges.resize(static_cast<std::size_t>(nbins) + 1);
    for (int b = 0; b <= nbins; ++b) d.edges[static_cast<std::size_t>(b)] = lo + width * b;
    d.masses.assign(static_cast<std::size_t>(nbins), 0.0);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        auto b = static_cast<std::size_t>((d.values[i] - lo) / width);
        if (b >= d.masses.size()) b = d.masses.size() - 1;
        d.masses[b] += d.weights[i];
    }

    std::vector<std::size_t> order(d.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d.values[a] < d.values[b]; });
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double v = d.values[order[i]], wm = 0.0;
        while (j < order.size() && d.values[order[j]] == v) wm += d.weights[order[j++]];
        if (j - i >= 2 && wm > ATOM_MASS_THRESHOLD) d.atoms.push_back({v, wm});
        i = j;
    }

    std::vector<double> flat = d.values;
    d.bandwidth = flat.size() >= 2 ? silverman_bandwidth(std::move(flat)) : 0.0;
    return d;
}

inline ObservableDistribution mass_distribution(const EmpiricalMeasure& m, int nbins = 32) {
    return distribution_of(m, [](const SpectralField& u) { return mass(u); }, "mass", nbins);
}

inline ObservableDistribution energy_distribution(const EmpiricalMeasure& m, double p,
                                                  int oversample = 2, int nbins = 32) {
    CollocationGrid grid(m.basis, oversample);
    return distribution_of(
        m, [&](const SpectralField& u) { return grid.energy(u, p); }, "energy", nbins);
}

// Instantaneous variance of the mass functional along the noise directions:
// both real channels of mode m contribute a_m^2 |<u, e_m>|^2. Vanishes only
// at u = 0 when every amplitude is nonzero.
inline double quadratic_variation_mass(const SpectralField& u, const NoiseChannels& ch) {
    if (ch.a.size() != u.c.size()) throw Error("quadratic_variation: channel count mismatch");
    double q = 0.0;
    for (std::size_t m = 0; m < u.c.size(); ++m) q += sq(ch.a[m]) * std::norm(u.c[m]);
    return q;
}

// Energy version. The L2 gradient of the energy is (-Delta + 1)u + P|u|^{p-1}u;
// include_mass_term=false drops the +u term (an alternative printed form of
// the same quantity, kept selectable so the two can be compared).
inline double quadratic_variation_energy(const SpectralField& u, const NoiseChannels& ch,
                                         const CollocationGrid& grid, double p,
                                         bool include_mass_term = true) {
    if (ch.a.size() != u.c.size()) throw Error("quadratic_variation: channel count mismatch");
    SpectralField nl = grid.nonlinearity(u, p);
    double q = 0.0;
    for (std::size_t m = 0; m < u.c.size(); ++m) {
        double lam = u.basis->modes[m].lambda + (include_mass_term ? 1.0 : 0.0);
        q += sq(ch.a[m]) * std::norm(lam * u.c[m] + nl.c[m]);
    }
    return q;
}

// Nonnegative function sampled on a uniform grid; cubic interpolation inside
// the grid, identically zero outside. The sampling must cover the support
// with margin (the end samples are taken as zero).
struct SampledBump {
    double y0 = 0.0;
    double dy = 0.0;
    std::vector<double> v;

    double y1() const { return y0 + dy * static_cast<double>(v.size() - 1); }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double operator()(double y) const {
        if (v.size() < 4 || dy <= 0.0) throw ConfigError("bump: need >= 4 uniform samples");
        if (y <= y0 || y >= y1()) return 0.0;
        double s = (y - y0) / dy;
        auto i = static_cast<std::ptrdiff_t>(std::floor(s));
        i = std::clamp<std::ptrdiff_t>(i, 1, static_cast<std::ptrdiff_t>(v.size()) - 3);
        double t = s - static_cast<double>(i);
        // 4-point Lagrange on nodes i-1..i+2, local coordinate t in [0,1]
        double a = v[static_cast<std::size_t>(i - 1)], b = v[static_cast<std::size_t>(i)];
        double c = v[static_cast<std::size_t>(i + 1)], e = v[static_cast<std::size_t>(i + 2)];
        return a * (-t * (t - 1.0) * (t - 2.0) / 6.0) + b * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
               c * (-(t + 1.0) * t * (t - 2.0) / 2.0) + e * ((t + 1.0) * t * (t - 1.0) / 6.0);
    }
};

// Smooth compactly supported bump exp(1 - 1/(1 - t^2)) on |t| < 1, sampled
// with the stated margin on each side.
inline SampledBump sample_bump(double center, double halfwidth, double margin, std::size_t n) {
    if (n < 8 || halfwidth <= 0.0 || margin <= 0.0) throw ConfigError("sample_bump: bad grid");
    SampledBump g;
    g.y0 = center - halfwidth - margin;
    double y1 = center + halfwidth + margin;
    g.dy = (y1 - g.y0) / static_cast<double>(n - 1);
    g.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = g.y0 + g.dy * static_cast<double>(i);
        double t = (y - center) / halfwidth;
        g.v[i] = std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
    }
    return g;
}

// Resolvent test function Phi_lambda(x) = (2 lambda)^{-1/2} Integral g(y)
// exp(-|x-y| sqrt(2 lambda)) dy. value() integrates by composite Simpson split
// at the kink y = x; deriv() uses the differentiated kernel in closed form;
// second() is a central difference of deriv(), deliberately independent of
// the ODE the function satisfies so the residual check stays meaningful.
struct ResolventPhi {
    SampledBump g;
    double lambda = 1.0;
    double c = 0.0;  // sqrt(2 lambda)
    int panels = 4000;

    double value(double x) const {
        double pre = 1.0 / std::sqrt(2.0 * lambda);
        auto f = [&](double y) { return g(y) * std::exp(-c * std::abs(x - y)); };
        return pre * split_integral(f, x);
    }
    // The integrand's sign factor jumps at y = x with one-sided limits -g(x)
    // and +g(x); integrating the halves with their own closed-form integrands
    // keeps the kink endpoint exact (a lone sgn(0)=0 sample would leave an
    // O(panel width) endpoint error that the second difference amplifies).
    double deriv(double x) const {
        double lo = g.y0, hi = g.y1();
        auto left = [&](double y) { return g(y) * std::exp(-c * (x - y)); };
        auto right = [&](double y) { return g(y) * std::exp(-c * (y - x)); };
        if (x <= lo) return simpson(right, lo, hi);
        if (x >= hi) return -simpson(left, lo, hi);
        return simpson(right, x, hi) - simpson(left, lo, x);
    }
    double second(double x, double h = 1e-4) const {
        return (deriv(x + h) - deriv(x - h)) / (2.0 * h);
    }
    double operator()(double x) const { return value(x); }

  private:
    template <class F>
    double split_integral(F&& f, double x) const {
        double lo = g.y0, hi = g.y1();
        if (x > lo && x < hi) return simpson(f, lo, x) + simpson(f, x, hi);
        return simpson(f, lo, hi);
    }
    template <class F>
    double simpson(F&& f, double a, double b) const {
        if (!(b > a)) return 0.0;
        int n = std::max(2, panels - panels % 2);
        double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
        return acc * h / 3.0;
    }
};

inline ResolventPhi resolvent_phi(SampledBump g, double lambda, int panels = 4000) {
    if (lambda <= 0.0) throw ConfigError("resolvent_phi: lambda must be positive");
    if (g.v.size() < 4 || g.dy <= 0.0) throw ConfigError("resolvent_phi: bump grid too coarse");
    ResolventPhi phi;
    phi.g = std::move(g);
    phi.lambda = lambda;
    phi.c = std::sqrt(2.0 * lambda);
    phi.panels = panels;
    return phi;
}

struct ResolventResidualReport {
    double lambda = 0.0;
    double residual = 0.0;  // sup |(1/2)Phi'' + g - lambda Phi| / sup |g|
    double tol = 1e-6;
    bool pass = false;
};

inline ResolventResidualReport resolvent_residual(const ResolventPhi& phi,
                                                  const std::vector<double>& xs,
                                                  double tol = 1e-6) {
    if (xs.empty()) throw ConfigError("resolvent_residual: empty test grid");
    double gmax = phi.g.max_abs();
    if (gmax <= 0.0) throw Error("resolvent_residual: zero test function");
    ResolventResidualReport rep;
    rep.lambda = phi.lambda;
    rep.tol = tol;
    for (double x : xs) {
        double r = 0.5 * phi.second(x) + phi.g(x) - phi.lambda * phi.value(x);
        rep.residual = std::max(rep.residual, std::abs(r));
    }
    rep.residual /= gmax;
    rep.pass = rep.residual <= tol;
    return rep;
}

// lambda * Phi_lambda(x) along a lambda sequence; vanishes as lambda -> 0 for
// integrable g.
inline std::vector<double> lambda_phi_sequence(const SampledBump& g, double x,
                                               const std::vector<double>& lambdas) {
    std::vector<double> out;
    out.reserve(lambdas.size());
    for (double lam : lambdas) out.push_back(lam * resolvent_phi(g, lam).value(x));
    return out;
}

// One trajectory's observable series F(u(t)) on a uniform-in-time window.
struct PathSeries {
    std::vector<double> t;
    std::vector<double> f;
};

struct GeneratorReport {
    double slope = 0.0;  // mean over paths of the per-path slope of Phi(F(u(t)))
    Ci ci;
    bool stationary_ok = false;
    double raw_slope = 0.0;  // same for the raw observable, drift detector
    Ci raw_ci;
    bool drift_detected = false;
    std::size_t paths = 0;
};

// Stationarity surrogate: under a stationary law the expected time derivative
// of Phi(F(u(t))) vanishes, so the paths' fitted slopes should straddle zero.
// A fitted change below numerical noise relative to the observable scale also
// counts as stationary (exactly conserved observables drift only by roundoff).
template <class Phi>
inline GeneratorReport generator_stationarity_check(const std::vector<PathSeries>& runs,
                                                    Phi&& phi, double ci_level = 0.95) {
    if (runs.size() < 2) throw Error("generator check: need >= 2 paths");
    std::vector<double> slopes, raw_slopes;
    double span = 0.0, scale = 0.0, raw_scale = 0.0;
    for (const auto& run : runs) {
        if (run.t.size() != run.f.size() || run.t.size() < 2)
            throw Error("generator check: path needs >= 2 matched samples");
        std::vector<double> pf(run.f.size());
        for (std::size_t i = 0; i < run.f.size(); ++i) pf[i] = phi(run.f[i]);
        slopes.push_back(linear_fit(run.t, pf).slope);
        raw_slopes.push_back(linear_fit(run.t, run.f).slope);
        span = std::max(span, run.t.back() - run.t.front());
        for (double v : pf) scale = std::max(scale, std::abs(v));
        for (double v : run.f) raw_scale = std::max(raw_scale, std::abs(v));
    }
    GeneratorReport rep;
    rep.paths = runs.size();
    rep.slope = mean(slopes);
    rep.raw_slope = mean(raw_slopes);
    rep.ci = bootstrap_mean_ci(slopes, ci_level);
    rep.raw_ci = bootstrap_mean_ci(raw_slopes, ci_level);
    bool negligible = std::abs(rep.slope) * span <= 1e-9 * (1.0 + scale);
    bool raw_negligible = std::abs(rep.raw_slope) * span <= 1e-9 * (1.0 + raw_scale);
    rep.stationary_ok = rep.ci.contains(0.0) || negligible;
    rep.drift_detected = !rep.raw_ci.contains(0.0) && !raw_negligible;
    return rep;
}

struct SmallBallRow {
    double delta = 0.0;
    double prob = 0.0;
};

struct SmallBallReport {
    std::vector<SmallBallRow> rows;
    double C = 0.0;  // origin-forced least squares over the unsaturated rows
    double slack = 0.25;
    bool pass = false;
    bool inconclusive = false;  // every count zero: the grid never caught a sample
    bool degenerate = false;    // probability 1 already at the smallest ball
    double max_ratio = 0.0;     // sup prob / (C delta), diagnostic
};

// Empirical mu(B_delta(L2)) against a fitted linear envelope C*delta*(1+slack).
// Saturated rows (prob == 1) say nothing about the envelope constant, so they
// are censored from the fit but still checked against the bound; an atom at
// the origin keeps prob flat as delta shrinks and fails the small-delta rows.
inline SmallBallReport small_ball_probe(const EmpiricalMeasure& m, std::vector<double> deltas,
                                        double slack = 0.25) {
    if (m.snaps.empty()) throw Error("small_ball_probe: empty measure");
    if (deltas.empty()) throw ConfigError("small_ball_probe: empty delta list");
    for (std::size_t i = 0; i < deltas.size(); ++i)
        if (deltas[i] <= 0.0 || (i > 0 && deltas[i] <= deltas[i - 1]))
            throw ConfigError("small_ball_probe: deltas must be positive and increasing");

    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    std::vector<double> norms(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) norms[i] = l2_norm(m.snaps[i]);

    SmallBallReport rep;
    rep.slack = slack;
    for (double d : deltas) {
        double p = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (norms[i] <= d) p += m.weights[i];
        rep.rows.push_back({d, p / wsum});
    }

    bool all_zero = true;
    for (const auto& r : rep.rows) all_zero = all_zero && r.prob == 0.0;
    rep.inconclusive = all_zero;
    rep.degenerate = rep.rows.front().prob >= 1.0;
    if (rep.inconclusive || rep.degenerate) return rep;

    double num = 0.0, den = 0.0;
    for (const auto& r : rep.rows)
        if (r.prob < 1.0) {
            num += r.prob * r.delta;
            den += r.delta * r.delta;
        }
    rep.C = den > 0.0 ? num / den : 0.0;
    rep.pass = rep.C > 0.0;
    for (const auto& r : rep.rows) {
        double bound = rep.C * r.delta * (1.0 + slack);
        if (rep.C > 0.0) rep.max_ratio = std::max(rep.max_ratio, r.prob / (rep.C * r.delta));
        if (r.prob > bound) rep.pass = false;
    }
    return rep;
}

}  // namespace snls
