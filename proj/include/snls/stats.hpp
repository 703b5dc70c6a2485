// Small statistics toolbox: moments, percentile bootstrap, two-sample
// Kolmogorov-Smirnov, least squares fits, histograms, KDE bandwidth.
#pragma once

#include <algorithm>
#include <vector>

#include "snls/common.hpp"
#include "snls/rng.hpp"

namespace snls {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw Error("mean: empty sample");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw Error("variance: need at least 2 samples");
    double m = mean(v), acc = 0.0;
    for (double x : v) acc += sq(x - m);
    return acc / static_cast<double>(v.size() - 1);
}

// Interpolated quantile of an already sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error("quantile: empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

struct Ci {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Percentile bootstrap for the sample mean; deterministic given the seed.
inline Ci bootstrap_mean_ci(const std::vector<double>& v, double level = 0.99,
                            int resamples = 2000, std::uint64_t seed = 17) {
    if (v.size() < 2) throw Error("bootstrap: need at least 2 samples");
    RngStream rng(seed, 0);
    auto n = v.size();
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            if (j >= n) j = n - 1;
            acc += v[j];
        }
        means[static_cast<std::size_t>(b)] = acc / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    double a = 0.5 * (1.0 - level);
    return {quantile_sorted(means, a), quantile_sorted(means, 1.0 - a), level};
}

// Two-sample KS statistic; inputs need not be sorted.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {  // tie: consume the value on both sides before comparing CDFs
            double v = a[i];
            while (i < a.size() && a[i] == v) ++i;
            while (j < b.size() && b[j] == v) ++j;
        }
        double fa = static_cast<double>(i) / static_cast<double>(a.size());
        double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

// Asymptotic two-sided p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n, std::size_t m) {
    double ne = static_cast<double>(n) * static_cast<double>(m) /
                static_cast<double>(n + m);
    double rt = std::sqrt(ne);
    double lam = (rt + 0.12 + 0.11 / rt) * d;
    if (lam < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * sq(lam * k));
        p += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, p));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    std::size_t n = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("fit: need >= 2 matched points");
    auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i];
        sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw Error("fit: degenerate abscissae");
    LinearFit f;
    f.n = x.size();
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        ss_res += sq(y[i] - f.slope * x[i] - f.intercept);
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// y ~ slope * x with zero intercept.
inline LinearFit linear_fit_through_origin(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw Error("fit: need matched points");
    double sxx = 0, sxy = 0, syy = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i]; sy += y[i];
    }
    if (sxx == 0.0) throw Error("fit: degenerate abscissae");
    LinearFit f;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = 0.0;
    double n = static_cast<double>(x.size());
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ss_res += sq(y[i] - f.slope * x[i]);
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// Log-log slope over the strictly positive entries; entries with y <= 0 are
// excluded (they are statistical zeros in tail studies) and at least
// min_points survivors are required.
inline LinearFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                              std::size_t min_points = 2) {
    if (x.size() != y.size()) throw Error("loglog: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < min_points)
        throw Error("loglog: fewer than " + std::to_string(min_points) + " positive points");
    return linear_fit(lx, ly);
}

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> counts;
    std::vector<double> density;  // counts / (n * bin_width)
    double bin_width = 0.0;
    std::size_t n = 0;
};

inline Histogram histogram(const std::vector<double>& v, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw Error("histogram: bad bins or range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.n = v.size();
    h.bin_width = (hi - lo) / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0.0);
    for (double x : v) {
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>((x - lo) / h.bin_width);
        if (b >= h.counts.size()) b = h.counts.size() - 1;
        h.counts[b] += 1.0;
    }
    h.density.resize(h.counts.size());
    double norm = static_cast<double>(v.size()) * h.bin_width;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        h.density[i] = norm > 0.0 ? h.counts[i] / norm : 0.0;
    return h;
}

inline double silverman_bandwidth(std::vector<double> v) {
    if (v.size() < 2) throw Error("bandwidth: need >= 2 samples");
    double sd = std::sqrt(variance(v));
    std::sort(v.begin(), v.end());
    double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    if (spread == 0.0) return 0.0;  // degenerate sample: caller handles atoms
    return 0.9 * spread * std::pow(static_cast<double>(v.size()), -0.2);
}

inline double kde_eval(const std::vector<double>& samples, double bw, double x) {
    if (samples.empty() || bw <= 0.0) throw Error("kde: empty sample or bad bandwidth");
    double acc = 0.0;
    for (double s : samples) acc += std::exp(-0.5 * sq((x - s) / bw));
    return acc / (static_cast<double>(samples.size()) * bw * std::sqrt(TWO_PI));
}

}  // namespace snls
