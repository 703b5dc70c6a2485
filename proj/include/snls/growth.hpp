// Growth-function pairs (xi, rho = 3 xi^{-1}) and the smooth radial cutoff.
//
// xi is increasing and concave on [0,inf); rho grows fast enough that
// C(rho,p) = sup x^p e^{-rho(x)} is finite for every p > 1, which is the
// inequality the dissipation estimates lean on.
#pragma once

#include <cmath>
#include <string>

#include "snls/common.hpp"

namespace snls {

class GrowthPair {
  public:
    enum class Kind { Identity, Log1p, LogLog1p, Sqrt1p };

    static GrowthPair named(const std::string& name) {
        if (name == "identity") return GrowthPair(Kind::Identity);
        if (name == "log1p") return GrowthPair(Kind::Log1p);
        if (name == "loglog1p") return GrowthPair(Kind::LogLog1p);
        if (name == "sqrt1p") return GrowthPair(Kind::Sqrt1p);
        throw ConfigError("unknown growth function: " + name);
    }

    explicit GrowthPair(Kind k = Kind::Log1p) : kind_(k) {}

    Kind kind() const { return kind_; }

    const char* name() const {
        switch (kind_) {
            case Kind::Identity: return "identity";
            case Kind::Log1p: return "log1p";
            case Kind::LogLog1p: return "loglog1p";
            case Kind::Sqrt1p: return "sqrt1p";
        }
        return "?";
    }

    double xi(double x) const {
        switch (kind_) {
            case Kind::Identity: return x;
            case Kind::Log1p: return std::log1p(x);
            case Kind::LogLog1p: return std::log1p(std::log1p(x));
            case Kind::Sqrt1p: return std::sqrt(1.0 + x) - 1.0;
        }
        return x;
    }

    double xi_inv(double y) const {
        switch (kind_) {
            case Kind::Identity: return y;
            case Kind::Log1p: return std::expm1(y);
            case Kind::LogLog1p: return std::expm1(std::expm1(y));
            case Kind::Sqrt1p: return y * y + 2.0 * y;
        }
        return y;
    }

    double rho(double x) const { return 3.0 * xi_inv(x); }

    // sup_{x>0} x^p e^{-rho(x)} by golden-section refinement of a log-grid
    // scan of p ln x - rho(x).
    double hyp_constant(double p) const {
        if (p <= 1.0) throw Error("hyp_constant: requires p > 1");
        auto h = [&](double x) { return p * std::log(x) - rho(x); };
        double best_x = 1e-8, best = h(best_x);
        for (double lx = -18.0; lx <= 18.0; lx += 0.05) {
            double x = std::exp(lx);
            double v = h(x);
            if (v > best) { best = v; best_x = x; }
        }
        double lo = best_x * std::exp(-0.06), hi = best_x * std::exp(0.06);
        const double gr = 0.6180339887498949;
        double a = lo, b = hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = h(x1), f2 = h(x2);
        for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + b); ++it) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a); f2 = h(x2);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a); f1 = h(x1);
            }
        }
        return std::exp(std::max(best, std::max(f1, f2)));
    }

  private:
    Kind kind_;
};

// Smooth radial cutoff chi_R: identically 1 on [0,R], 0 on [2R,inf), C^2,
// realized as a quintic smoothstep on the transition. Derivative bounds are
// sup|chi_R'| = 1.875/R and sup|chi_R''| = 5.7735.../R^2; the constants are
// properties of this profile (a smooth unit drop over a width-R window cannot
// have sup|chi'| <= 1/R).
inline constexpr double CHI_D1_SUP = 1.875;
inline constexpr double CHI_D2_SUP = 5.7735026918962584;  // 60 t(1-t)(1-2t) extremum

inline double chi_R(double x, double R) {
    if (R <= 0.0) throw Error("chi_R: R must be positive");
    double t = x / R - 1.0;
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    double v = 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    return std::min(1.0, std::max(0.0, v));  // roundoff guard at the ends
}

inline double chi_R_d1(double x, double R) {
    double t = x / R - 1.0;
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -30.0 * t * t * sq(1.0 - t) / R;
}

inline double chi_R_d2(double x, double R) {
    double t = x / R - 1.0;
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (R * R);
}

}  // namespace snls
