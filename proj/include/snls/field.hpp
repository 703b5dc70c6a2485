// Spectral fields: complex coefficient vectors over a ModeBasis, plus the
// coefficient-space operations (projection, Sobolev norms, mass, free flow).
#pragma once

#include <cmath>
#include <utility>

#include "snls/basis.hpp"
#include "snls/common.hpp"
#include "snls/rng.hpp"

namespace snls {

struct SpectralField {
    BasisPtr basis;
    std::vector<cplx> c;

    SpectralField() = default;
    explicit SpectralField(BasisPtr b) : basis(std::move(b)), c(basis->size(), cplx{0.0, 0.0}) {}
    SpectralField(BasisPtr b, std::vector<cplx> coeffs) : basis(std::move(b)), c(std::move(coeffs)) {
        if (c.size() != basis->size()) throw Error("SpectralField: coefficient count mismatch");
    }

    std::size_t size() const { return c.size(); }

    SpectralField& operator+=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    SpectralField& operator*=(cplx a) {
        for (auto& v : c) v *= a;
        return *this;
    }

    void check_same(const SpectralField& o) const {
        if (basis.get() != o.basis.get() && !(basis && o.basis && basis->same_layout(*o.basis)))
            throw Error("field operation on mismatched bases");
    }
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

inline void axpy(cplx a, const SpectralField& x, SpectralField& y) {
    y.check_same(x);
    for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] += a * x.c[i];
}

// P_N: zero every coefficient beyond the admitted set of sub-cutoff n.
inline SpectralField project(const SpectralField& u, int n) {
    SpectralField out = u;
    std::size_t keep = u.basis->admitted_count(n);
    for (std::size_t i = keep; i < out.c.size(); ++i) out.c[i] = 0.0;
    return out;
}

// H^sigma norm sqrt(sum (1+lambda)^sigma |u_m|^2); Parseval makes this exact.
inline double sobolev_norm(const SpectralField& u, double sigma) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.c.size(); ++i)
        acc += std::pow(1.0 + u.basis->lambda(i), sigma) * std::norm(u.c[i]);
    return std::sqrt(acc);
}

inline double l2_norm_sq(const SpectralField& u) {
    double acc = 0.0;
    for (const auto& v : u.c) acc += std::norm(v);
    return acc;
}

inline double l2_norm(const SpectralField& u) { return std::sqrt(l2_norm_sq(u)); }

// sum lambda |u_m|^2 = ||grad u||_{L^2}^2.
inline double grad_norm_sq(const SpectralField& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.c.size(); ++i) acc += u.basis->lambda(i) * std::norm(u.c[i]);
    return acc;
}

// Real inner product (u,v) = Re int u conj(v).
inline double inner(const SpectralField& u, const SpectralField& v) {
    u.check_same(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.c.size(); ++i)
        acc += u.c[i].real() * v.c[i].real() + u.c[i].imag() * v.c[i].imag();
    return acc;
}

inline double mass(const SpectralField& u) { return 0.5 * l2_norm_sq(u); }

// One linear phase factor shared by the free propagator and every integrator
// substep: exp((-i(c0+lambda) - alpha (1+lambda)^(s-1)) t). With alpha=0 this
// is the isometry exp(-it(c0+lambda)).
inline cplx linear_phase_factor(double lambda, double t, double c0,
                                double alpha = 0.0, double s = 0.0) {
    double re = (alpha == 0.0) ? 0.0 : -alpha * std::pow(1.0 + lambda, s - 1.0) * t;
    return std::exp(cplx(re, -(c0 + lambda) * t));
}

// S(t) = e^{it(Delta-1)}: diagonal phase e^{-it(1+lambda)} per mode.
inline SpectralField linear_propagator(const SpectralField& u, double t) {
    SpectralField out = u;
    for (std::size_t i = 0; i < out.c.size(); ++i)
        out.c[i] *= linear_phase_factor(u.basis->lambda(i), t, 1.0);
    return out;
}

// v = e^{-it} u maps solutions of u_t = i(Delta u - |u|^{p-1}u) to solutions
// of v_t = i((Delta-1)v - |v|^{p-1}v); `forward` applies that gauge,
// backward undoes it.
inline SpectralField gauge_transform(const SpectralField& u, double t, bool forward = true) {
    SpectralField out = u;
    cplx ph = std::exp(cplx(0.0, forward ? -t : t));
    for (auto& v : out.c) v *= ph;
    return out;
}

inline double critical_exponent(double p, int d) {
    if (p <= 1.0) throw Error("critical_exponent: requires p > 1");
    return d / 2.0 - 2.0 / (p - 1.0);
}

// Random field with coefficients (g1+i g2) (1+lambda)^(-decay/2), optionally
// rescaled to a target H^sigma norm.
inline SpectralField random_field(const BasisPtr& basis, double decay, RngStream& rng,
                                  double target_norm = -1.0, double target_sigma = 0.0) {
    SpectralField u(basis);
    for (std::size_t i = 0; i < u.c.size(); ++i) {
        cplx g = rng.gaussian_pair();
        u.c[i] = g * std::pow(1.0 + basis->lambda(i), -decay / 2.0);
    }
    if (target_norm > 0.0) {
        double n = sobolev_norm(u, target_sigma);
        if (n == 0.0) throw Error("random_field: zero draw cannot be normalized");
        u *= cplx(target_norm / n, 0.0);
    }
    return u;
}

// Coefficients re-indexed into another basis by matching lattice vectors.
inline SpectralField rebase(const SpectralField& u, const BasisPtr& to) {
    SpectralField out(to);
    auto map = mode_map(*u.basis, *to);
    for (std::size_t i = 0; i < u.c.size(); ++i)
        if (map[i] >= 0) out.c[static_cast<std::size_t>(map[i])] = u.c[i];
    return out;
}

}  // namespace snls
