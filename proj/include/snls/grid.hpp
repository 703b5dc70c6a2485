// Collocation grid: spectral <-> physical transforms and everything that
// needs point values (nonlinearity, L^q norms, the potential energy term).
//
// The grid has G points per axis with G a power of two chosen so that
// G >= oversample * (2 kmax + 1); transforms are plain radix-2 FFTs applied
// axis by axis. Twiddle tables live in a thread_local cache, so concurrent
// workers never share mutable state.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "snls/field.hpp"

namespace snls {

namespace detail {

inline const std::vector<cplx>& twiddles(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<cplx>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> w(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        double a = -TWO_PI * static_cast<double>(j) / static_cast<double>(n);
        w[j] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

// In-place radix-2 FFT on strided data; sign=-1 analysis, +1 synthesis.
inline void fft_line(cplx* data, std::size_t n, std::size_t stride, int sign) {
    if (n < 2) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i * stride], data[j * stride]);
    }
    const auto& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx tw = w[j * step];
                if (sign > 0) tw = std::conj(tw);
                cplx* a = data + (i + j) * stride;
                cplx* b = data + (i + j + len / 2) * stride;
                cplx t = *b * tw;
                *b = *a - t;
                *a += t;
            }
        }
    }
}

inline void fft_nd(std::vector<cplx>& data, int d, std::size_t G, int sign) {
    std::size_t total = data.size();
    std::size_t stride = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        std::size_t block = G * stride;
        for (std::size_t outer = 0; outer < total / block; ++outer)
            for (std::size_t inner = 0; inner < stride; ++inner)
                fft_line(data.data() + outer * block + inner, G, stride, sign);
        stride *= G;
    }
}

}  // namespace detail

class CollocationGrid {
  public:
    CollocationGrid(BasisPtr basis, int oversample = 2)
        : basis_(std::move(basis)), oversample_(oversample) {
        if (oversample_ < 1) throw Error("CollocationGrid: oversample must be >= 1");
        std::size_t need = static_cast<std::size_t>(oversample_) *
                           (2 * static_cast<std::size_t>(basis_->kmax) + 1);
        G_ = 2;
        while (G_ < need) G_ <<= 1;
        total_ = 1;
        for (int i = 0; i < basis_->d; ++i) total_ *= G_;
        mode_index_.resize(basis_->size());
        for (std::size_t m = 0; m < basis_->size(); ++m) {
            std::size_t idx = 0;
            for (int i = 0; i < basis_->d; ++i) {
                int g = basis_->modes[m].k[i] % static_cast<int>(G_);
                if (g < 0) g += static_cast<int>(G_);
                idx = idx * G_ + static_cast<std::size_t>(g);
            }
            mode_index_[m] = idx;
        }
        norm_factor_ = std::pow(TWO_PI, -0.5 * basis_->d);
        quad_weight_ = std::pow(TWO_PI / static_cast<double>(G_),
                                static_cast<double>(basis_->d));
    }

    const BasisPtr& basis() const { return basis_; }
    std::size_t points_per_axis() const { return G_; }
    std::size_t total_points() const { return total_; }
    int oversample() const { return oversample_; }
    double quad_weight() const { return quad_weight_; }

    // u(x_j) at the grid points.
    std::vector<cplx> to_grid(const SpectralField& u) const {
        check(u);
        std::vector<cplx> g(total_, cplx{0.0, 0.0});
        for (std::size_t m = 0; m < u.c.size(); ++m) g[mode_index_[m]] = u.c[m] * norm_factor_;
        detail::fft_nd(g, basis_->d, G_, +1);
        return g;
    }

    // L^2 projection of grid values back onto the basis modes.
    SpectralField from_grid(std::vector<cplx> g) const {
        if (g.size() != total_) throw Error("from_grid: wrong grid size");
        detail::fft_nd(g, basis_->d, G_, -1);
        double scale = 1.0 / (norm_factor_ * static_cast<double>(total_));
        SpectralField u(basis_);
        for (std::size_t m = 0; m < u.c.size(); ++m) u.c[m] = g[mode_index_[m]] * scale;
        return u;
    }

    // P_N(|u|^{p-1} u) by pointwise evaluation.
    SpectralField nonlinearity(const SpectralField& u, double p) const {
        auto g = to_grid(u);
        apply_amplitude_power(g, p);
        return from_grid(std::move(g));
    }

    // int |u|^q dx by the trapezoid-on-torus rule (exact for band-limited |u|^q).
    double lp_pow(const SpectralField& u, double q) const {
        auto g = to_grid(u);
        double acc = 0.0;
        if (is_even_integer(q)) {
            double h = q / 2.0;
            for (const auto& v : g) acc += ipow(std::norm(v), static_cast<int>(h));
        } else {
            for (const auto& v : g) acc += std::pow(std::abs(v), q);
        }
        return acc * quad_weight_;
    }

    double lp_norm(const SpectralField& u, double q) const {
        if (q == std::numeric_limits<double>::infinity()) {
            auto g = to_grid(u);
            double mx = 0.0;
            for (const auto& v : g) mx = std::max(mx, std::abs(v));
            return mx;
        }
        if (q < 1.0) throw Error("lp_norm: q must be >= 1 or inf");
        return std::pow(lp_pow(u, q), 1.0 / q);
    }

    // E(u) = 1/2 ||u||^2 + 1/2 ||grad u||^2 + 1/(p+1) ||u||_{L^{p+1}}^{p+1}.
    double energy(const SpectralField& u, double p) const {
        return 0.5 * l2_norm_sq(u) + 0.5 * grad_norm_sq(u) + lp_pow(u, p + 1.0) / (p + 1.0);
    }

    static void apply_amplitude_power(std::vector<cplx>& g, double p) {
        if (is_even_integer(p - 1.0)) {
            int h = static_cast<int>((p - 1.0) / 2.0);
            for (auto& v : g) v *= ipow(std::norm(v), h);
        } else {
            for (auto& v : g) v *= std::pow(std::norm(v), (p - 1.0) / 2.0);
        }
    }

  private:
    static bool is_even_integer(double q) {
        return q == std::floor(q) && std::fmod(q, 2.0) == 0.0;
    }
    static double ipow(double b, int e) {
        double r = 1.0;
        while (e > 0) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }
    void check(const SpectralField& u) const {
        if (u.basis.get() != basis_.get() && !u.basis->same_layout(*basis_))
            throw Error("grid/field basis mismatch");
        if (u.c.size() != mode_index_.size()) throw Error("grid/field size mismatch");
    }

    BasisPtr basis_;
    int oversample_;
    std::size_t G_ = 0, total_ = 0;
    std::vector<std::size_t> mode_index_;
    double norm_factor_ = 1.0, quad_weight_ = 1.0;
};

}  // namespace snls
