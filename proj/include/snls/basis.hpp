// Fourier eigenbasis of -Laplace on the d-torus (2pi period, d in {1,2,3}).
//
// Modes are the normalized exponentials (2pi)^(-d/2) e^{ik.x}, one complex
// coefficient per lattice vector k, ordered by eigenvalue lambda = |k|^2 with
// lexicographic tie-break in k. The cutoff index N counts eigenvalues in that
// order; the default "full shell" semantics rounds the admitted set up to the
// whole shell of lambda_N so truncation commutes with torus symmetries.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "snls/common.hpp"

namespace snls {

struct Mode {
    std::array<int, 3> k{0, 0, 0};  // only the first d entries are used
    double lambda = 0.0;
};

class ModeBasis {
  public:
    int d = 1;
    int cutoff = 0;
    bool full_shell = true;
    std::vector<Mode> modes;
    int kmax = 0;  // max |k_i| over admitted modes

    std::size_t size() const { return modes.size(); }
    double lambda(std::size_t m) const { return modes[m].lambda; }
    double max_lambda() const { return modes.empty() ? 0.0 : modes.back().lambda; }

    // Number of leading modes admitted by a sub-cutoff n <= cutoff, under this
    // basis's shell semantics.
    std::size_t admitted_count(int n) const {
        if (n < 0) throw Error("admitted_count: negative cutoff");
        if (static_cast<std::size_t>(n) >= modes.size())
            throw Error("admitted_count: cutoff exceeds basis");
        double ln = modes[static_cast<std::size_t>(n)].lambda;
        if (!full_shell) return static_cast<std::size_t>(n) + 1;
        std::size_t c = static_cast<std::size_t>(n) + 1;
        while (c < modes.size() && modes[c].lambda == ln) ++c;
        return c;
    }

    bool same_layout(const ModeBasis& o) const {
        return d == o.d && cutoff == o.cutoff && full_shell == o.full_shell;
    }
};

using BasisPtr = std::shared_ptr<const ModeBasis>;

namespace detail {

inline bool lex_less(const std::array<int, 3>& a, const std::array<int, 3>& b, int d) {
    for (int i = 0; i < d; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace detail

inline BasisPtr build_basis(int d, int N, bool full_shell = true) {
    if (d < 1 || d > 3) throw Error("build_basis: d must be 1, 2 or 3");
    if (N < 0) throw Error("build_basis: N must be >= 0");

    // Grow the enumeration box until the ball lambda <= K^2 surely holds N+1
    // modes; every mode with lambda <= K^2 has all |k_i| <= K.
    int K = 1;
    std::vector<Mode> all;
    for (;;) {
        all.clear();
        std::array<int, 3> k{0, 0, 0};
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int i = 0; i < d; ++i) { lo[i] = -K; hi[i] = K; }
        for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0])
            for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1])
                for (k[2] = lo[2]; k[2] <= hi[2]; ++k[2]) {
                    double lam = 0.0;
                    for (int i = 0; i < d; ++i) lam += sq(static_cast<double>(k[i]));
                    if (lam <= static_cast<double>(K) * K) all.push_back({k, lam});
                }
        if (all.size() >= static_cast<std::size_t>(N) + 1) break;
        ++K;
    }

    std::sort(all.begin(), all.end(), [d](const Mode& a, const Mode& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        return detail::lex_less(a.k, b.k, d);
    });

    double lambdaN = all[static_cast<std::size_t>(N)].lambda;
    std::size_t count = static_cast<std::size_t>(N) + 1;
    if (full_shell) {
        while (count < all.size() && all[count].lambda == lambdaN) ++count;
    }

    auto basis = std::make_shared<ModeBasis>();
    basis->d = d;
    basis->cutoff = N;
    basis->full_shell = full_shell;
    basis->modes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    int km = 0;
    for (const auto& m : basis->modes)
        for (int i = 0; i < d; ++i) km = std::max(km, std::abs(m.k[i]));
    basis->kmax = km;
    return basis;
}

// Map of coefficients from basis `from` into basis `to` by matching lattice
// vectors; modes absent in `to` are dropped, absent in `from` read as zero.
inline std::vector<std::ptrdiff_t> mode_map(const ModeBasis& from, const ModeBasis& to) {
    std::vector<std::ptrdiff_t> map(from.size(), -1);
    for (std::size_t i = 0; i < from.size(); ++i) {
        // both lists are (lambda, lex) sorted; binary search in `to`
        const Mode& m = from.modes[i];
        auto it = std::lower_bound(
            to.modes.begin(), to.modes.end(), m,
            [&](const Mode& a, const Mode& b) {
                if (a.lambda != b.lambda) return a.lambda < b.lambda;
                return detail::lex_less(a.k, b.k, to.d);
            });
        if (it != to.modes.end() && it->lambda == m.lambda && it->k == m.k)
            map[i] = it - to.modes.begin();
    }
    return map;
}

}  // namespace snls
