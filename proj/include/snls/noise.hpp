// Additive noise acting on E_N: each complex mode m carries two independent
// real channels of amplitude a_m, so an increment over dt has
// E||dzeta||^2 = A_{0,N} dt with A_{sigma,N} = 2 sum_m a_m^2 lambda_m^sigma
// (sum over the signed-index modes of the basis; lambda^0 := 1 at lambda = 0).
// Default family a_m = (1 + lambda_m)^{-(s+1)/2}; an optional rescale pins the
// full-lattice A_0 to a prescribed Lambda.
#pragma once

#include <map>
#include <mutex>

#include "snls/field.hpp"
#include "snls/rng.hpp"

namespace snls {

struct NoiseSpec {
    double s = 2.0;        // regularity parameter of the amplitude family
    double Lambda = -1.0;  // > 0: rescale amplitudes so full-lattice A_0 = Lambda
};

namespace detail {

inline double lambda_pow(double lambda, double sigma) {
    if (sigma == 0.0) return 1.0;
    if (sigma == 1.0) return lambda;
    if (sigma == 2.0) return lambda * lambda;
    return std::pow(lambda, sigma);
}

inline double inv_weight_pow(double lambda, double e) {
    // (1 + lambda)^{-e}, multiplication fast path for small integer e
    if (e == std::floor(e) && e > 0.0 && e <= 8.0) {
        double b = 1.0 + lambda, r = 1.0;
        for (int i = 0; i < static_cast<int>(e); ++i) r *= b;
        return 1.0 / r;
    }
    return std::pow(1.0 + lambda, -e);
}

}  // namespace detail

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
    int radius = 0;
};

// Full-lattice A_sigma = 2 sum_{k in Z^d} (1+|k|^2)^{-(s+1)} |k|^{2 sigma},
// summed over max-norm shells until the estimated tail (integral comparison
// with the shell envelope j^{d-1-q}) drops below tol * partial sum, or the
// per-dimension radius cap is hit; tail_bound reports the honest remainder
// estimate either way. Converges iff q := 2(s+1) - 2 sigma > d.
inline SeriesValue A_sigma_full(int d, double s, double sigma, double tol = 1e-12) {
    if (d < 1 || d > 3) throw Error("A_sigma_full: d must be 1, 2 or 3");
    double q = 2.0 * (s + 1.0) - 2.0 * sigma;  // decay power in |k|
    if (q <= static_cast<double>(d)) throw Error("A_sigma_full: series diverges");
    auto term = [&](long long k2) {
        double lam = static_cast<double>(k2);
        return detail::inv_weight_pow(lam, s + 1.0) * detail::lambda_pow(lam, sigma);
    };
    const int cap = d == 1 ? 100000 : (d == 2 ? 8192 : 320);
    double total = term(0);
    double tail_est = 0.0;
    int K = 0;
    for (K = 1; K <= cap; ++K) {
        double shell_sum = 0.0;
        if (d == 1) {
            shell_sum = 2.0 * term(static_cast<long long>(K) * K);
        } else if (d == 2) {
            for (int b = -K; b <= K; ++b)
                shell_sum += 2.0 * term(static_cast<long long>(K) * K +
                                        static_cast<long long>(b) * b);
            for (int a = -K + 1; a <= K - 1; ++a)
                shell_sum += 2.0 * term(static_cast<long long>(a) * a +
                                        static_cast<long long>(K) * K);
        } else {
            for (int b = -K; b <= K; ++b)
                for (int c = -K; c <= K; ++c)
                    shell_sum += 2.0 * term(static_cast<long long>(K) * K +
                                            static_cast<long long>(b) * b +
                                            static_cast<long long>(c) * c);
            for (int a = -K + 1; a <= K - 1; ++a) {
                for (int c = -K; c <= K; ++c)
                    shell_sum += 2.0 * term(static_cast<long long>(a) * a +
                                            static_cast<long long>(K) * K +
                                            static_cast<long long>(c) * c);
                for (int b = -K + 1; b <= K - 1; ++b)
                    shell_sum += 2.0 * term(static_cast<long long>(a) * a +
                                            static_cast<long long>(b) * b +
                                            static_cast<long long>(K) * K);
            }
        }
        total += shell_sum;
        tail_est = shell_sum * static_cast<double>(K) / (q - d);
        if (tail_est < tol * total && K >= 8) break;
    }
    SeriesValue out;
    out.radius = std::min(K, cap);
    out.tail_bound = 2.0 * (2.0 * tail_est);
    out.value = 2.0 * total;
    return out;
}

// make_channels recomputes the same series for every ensemble member, so the
// defaults are memoized.
inline SeriesValue A_sigma_full_cached(int d, double s, double sigma) {
    struct Key {
        int d;
        double s, sigma;
        bool operator<(const Key& o) const {
            if (d != o.d) return d < o.d;
            if (s != o.s) return s < o.s;
            return sigma < o.sigma;
        }
    };
    static std::map<Key, SeriesValue> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    Key key{d, s, sigma};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, A_sigma_full(d, s, sigma)).first;
    return it->second;
}

struct NoiseChannels {
    BasisPtr basis;
    std::vector<double> a;  // per-mode channel amplitude, rescale included
    double scale = 1.0;     // sqrt(Lambda / A_0) when a Lambda rescale is active
    double A0N = 0.0;       // 2 sum a_m^2
};

inline NoiseChannels make_channels(const BasisPtr& basis, const NoiseSpec& spec) {
    NoiseChannels ch;
    ch.basis = basis;
    if (spec.Lambda > 0.0) {
        double A0 = A_sigma_full_cached(basis->d, spec.s, 0.0).value;
        ch.scale = std::sqrt(spec.Lambda / A0);
    }
    ch.a.resize(basis->size());
    double s2 = 0.0;
    for (std::size_t m = 0; m < basis->size(); ++m) {
        ch.a[m] = ch.scale * std::pow(1.0 + basis->lambda(m), -0.5 * (spec.s + 1.0));
        s2 += sq(ch.a[m]);
    }
    ch.A0N = 2.0 * s2;
    return ch;
}

inline double A_sigma_N(const NoiseChannels& ch, double sigma) {
    double acc = 0.0;
    for (std::size_t m = 0; m < ch.a.size(); ++m)
        acc += sq(ch.a[m]) * detail::lambda_pow(ch.basis->lambda(m), sigma);
    return 2.0 * acc;
}

// u += coef * sum_m a_m sqrt(dt) (g_m + i g'_m) e_m. Draws consume the stream
// in basis order regardless of coef so paired designs stay aligned.
inline void add_white_increment(SpectralField& u, const NoiseChannels& ch, double dt,
                                double coef, RngStream& rng) {
    double rdt = std::sqrt(dt);
    for (std::size_t m = 0; m < ch.a.size(); ++m) {
        cplx g = rng.gaussian_pair();
        double sd = coef * ch.a[m] * rdt;
        if (sd != 0.0) u.c[m] += sd * g;
    }
}

}  // namespace snls
