// Flat `key = value` configuration with [sections], environment overrides
// (SNLS_<SECTION>_<KEY>), and canonical serialization. One registry drives
// parsing, serialization, and the override sweep, so the round trip
// parse -> serialize -> parse is the identity by construction.
#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/growth.hpp"
#include "snls/measure.hpp"
#include "snls/noise.hpp"
#include "snls/sde.hpp"
#include "snls/sigma.hpp"

namespace snls {

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto c = s.find(',', pos);
        if (c == std::string::npos) c = s.size();
        auto item = trim(s.substr(pos, c - pos));
        if (!item.empty()) out.push_back(item);
        pos = c + 1;
    }
    return out;
}

inline double parse_double(const std::string& v, const std::string& where) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad number '" + v + "' for " + where);
    return x;
}

inline long long parse_int(const std::string& v, const std::string& where) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad integer '" + v + "' for " + where);
    return x;
}

}  // namespace detail

struct SimConfig {
    // model
    int d = 1;
    int N = 8;
    double p = 7.0;
    double s = 2.0;
    double eps = 0.1;
    double c0 = 1.0;
    // integrate
    double dt = 1e-3;
    std::string scheme = "strang";
    int oversample = 2;
    double blowup_threshold = 1e8;
    double s_check = 2.0;
    // sde
    double alpha = 0.5;
    double taming_factor = 10.0;
    int max_halvings = 8;
    bool squared_rho_arg = false;
    std::string xi = "log1p";
    // noise
    double lambda_rescale = -1.0;  // > 0: rescale so the full-lattice A_0 equals this
    // simulate
    double T = 1.0;
    double u0_norm = 0.5;
    double u0_decay = 1.2;
    std::uint64_t u0_seed = 1;
    double record_every = 0.01;  // trajectory CSV cadence, time units
    // sample
    double burn_in = 20.0;
    double stride = 2.0;
    int count = 200;
    std::vector<std::uint64_t> seeds = {1, 2};
    // balance
    int balance_paths = 120;
    double balance_t = 1.0;
    double ci_level = 0.99;
    // sweep
    std::vector<double> sweep_alphas = {0.5, 0.25};
    double burn_base = 10.0;
    double stride_base = 1.0;
    // invariance
    double invariance_t = 1.0;
    // sigma
    std::vector<int> i_list = {1, 2, 3, 4, 5};
    int j_max = 3;
    double sigma_r = 2.0;
    double sigma_safety = SIGMA_SAFETY_DEFAULT;
    // coupling
    std::vector<double> coupling_alphas = {0.4, 0.2, 0.1};
    double coupling_t = 0.5;
    double r_cut = 50.0;
    int coupling_paths = 16;  // 8 paths leave the pairing trend under-resolved
    // density
    int nbins = 32;
    std::vector<double> lambda_grid = {0.1, 1.0, 10.0};
    int gen_paths = 8;
    double gen_window = 12.0;
    std::string pack;  // snapshot pack to analyze; empty samples inline
    // smallball
    std::vector<double> deltas = {0.01, 0.0178, 0.0316, 0.0562, 0.1,
                                  0.178, 0.316, 0.562, 1.0};
    double slack = 0.25;
    // scale
    std::vector<double> scale_lambdas = {1.0, 2.0, 4.0};
    // convergence
    std::vector<int> n_list = {8, 16, 32, 64};
    double conv_T = 0.0078125;  // the certified local window at unit norm
    double conv_dt = 1e-4;
    double conv_r = 1.0;
    double conv_decay = 2.51;  // spectral decay putting the data just inside H^s
    double conv_norm = 1.0;

    // One pass over every (section, key, member); drives parse/serialize/env.
    template <class V>
    void visit(V&& v) {
        v("model", "d", d);
        v("model", "N", N);
        v("model", "p", p);
        v("model", "s", s);
        v("model", "eps", eps);
        v("model", "c0", c0);
        v("integrate", "dt", dt);
        v("integrate", "scheme", scheme);
        v("integrate", "oversample", oversample);
        v("integrate", "blowup_threshold", blowup_threshold);
        v("integrate", "s_check", s_check);
        v("sde", "alpha", alpha);
        v("sde", "taming_factor", taming_factor);
        v("sde", "max_halvings", max_halvings);
        v("sde", "squared_rho_arg", squared_rho_arg);
        v("sde", "xi", xi);
        v("noise", "lambda", lambda_rescale);
        v("simulate", "T", T);
        v("simulate", "u0_norm", u0_norm);
        v("simulate", "u0_decay", u0_decay);
        v("simulate", "u0_seed", u0_seed);
        v("simulate", "record_every", record_every);
        v("sample", "burn_in", burn_in);
        v("sample", "stride", stride);
        v("sample", "count", count);
        v("sample", "seeds", seeds);
        v("balance", "paths", balance_paths);
        v("balance", "t", balance_t);
        v("balance", "ci_level", ci_level);
        v("sweep", "alphas", sweep_alphas);
        v("sweep", "burn_base", burn_base);
        v("sweep", "stride_base", stride_base);
        v("invariance", "t", invariance_t);
        v("sigma", "i_list", i_list);
        v("sigma", "j_max", j_max);
        v("sigma", "r", sigma_r);
        v("sigma", "safety", sigma_safety);
        v("coupling", "alphas", coupling_alphas);
        v("coupling", "t", coupling_t);
        v("coupling", "r_cut", r_cut);
        v("coupling", "paths", coupling_paths);
        v("density", "nbins", nbins);
        v("density", "lambda_grid", lambda_grid);
        v("density", "gen_paths", gen_paths);
        v("density", "gen_window", gen_window);
        v("density", "pack", pack);
        v("smallball", "deltas", deltas);
        v("smallball", "slack", slack);
        v("scale", "lambdas", scale_lambdas);
        v("convergence", "n_list", n_list);
        v("convergence", "T", conv_T);
        v("convergence", "dt", conv_dt);
        v("convergence", "r", conv_r);
        v("convergence", "decay", conv_decay);
        v("convergence", "norm", conv_norm);
    }

    std::string to_text() const {
        std::string out, cur;
        const_cast<SimConfig*>(this)->visit([&](const char* sec, const char* key, auto& field) {
            if (cur != sec) {
                if (!out.empty()) out += "\n";
                out += "[" + std::string(sec) + "]\n";
                cur = sec;
            }
            out += std::string(key) + " = " + field_to_string(field) + "\n";
        });
        return out;
    }

    static SimConfig parse_text(const std::string& text) {
        SimConfig cfg;
        std::string section;
        std::size_t line_no = 0, pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string line = text.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": unterminated section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": key outside any [section]");
            if (!cfg.assign(section, key, value))
                throw ConfigError("config line " + std::to_string(line_no) + ": unknown key " +
                                  section + "." + key);
        }
        cfg.validate();
        return cfg;
    }

    // SNLS_<SECTION>_<KEY> environment overrides; returns the applied count.
    int apply_env() {
        int applied = 0;
        visit([&](const char* sec, const char* key, auto& field) {
            std::string name = "SNLS_";
            for (const char* c = sec; *c; ++c) name += static_cast<char>(std::toupper(*c));
            name += '_';
            for (const char* c = key; *c; ++c) name += static_cast<char>(std::toupper(*c));
            if (const char* v = std::getenv(name.c_str())) {
                assign_field(field, detail::trim(v), name);
                ++applied;
            }
        });
        validate();
        return applied;
    }

    void validate() const {
        if (d < 1 || d > 3) throw ConfigError("config: d must be 1..3");
        if (N < 1) throw ConfigError("config: N must be >= 1");
        if (dt <= 0.0 || conv_dt <= 0.0) throw ConfigError("config: dt must be positive");
        if (scheme != "strang" && scheme != "exp-rk")
            throw ConfigError("config: scheme must be strang or exp-rk");
        GrowthPair::named(xi);  // throws on unknown names
        if (count < 1) throw ConfigError("config: sample count must be >= 1");
        if (seeds.empty()) throw ConfigError("config: need at least one seed");
    }

    IntegrateOptions integrate_options() const {
        IntegrateOptions o;
        o.dt = dt;
        o.p = p;
        o.scheme = scheme;
        o.c0 = c0;
        o.oversample = oversample;
        o.blowup_threshold = blowup_threshold;
        o.s_check = s_check;
        return o;
    }
    SdeOptions sde_options() const {
        SdeOptions o;
        o.dt = dt;
        o.p = p;
        o.alpha = alpha;
        o.s = s;
        o.eps = eps;
        o.oversample = oversample;
        o.c0 = c0;
        o.taming_factor = taming_factor;
        o.max_halvings = max_halvings;
        o.blowup_threshold = blowup_threshold;
        o.squared_rho_arg = squared_rho_arg;
        return o;
    }
    NoiseSpec noise_spec() const {
        NoiseSpec sp;
        sp.s = s;
        sp.Lambda = lambda_rescale;
        return sp;
    }
    GrowthPair growth_pair() const { return GrowthPair::named(xi); }
    SampleParams sample_params() const {
        SampleParams sp;
        sp.burn_in = burn_in;
        sp.stride = stride;
        sp.count = static_cast<std::size_t>(count);
        sp.seeds = seeds;
        return sp;
    }
    BasisPtr make_basis() const { return build_basis(d, N); }

    // programmatic single-key override; false when no such key is registered
    bool assign(const std::string& sec, const std::string& key, const std::string& value) {
        bool hit = false;
        visit([&](const char* vsec, const char* vkey, auto& field) {
            if (!hit && sec == vsec && key == vkey) {
                assign_field(field, value, sec + "." + key);
                hit = true;
            }
        });
        return hit;
    }

  private:
    static std::string field_to_string(const int& x) { return std::to_string(x); }
    static std::string field_to_string(const bool& x) { return x ? "true" : "false"; }
    static std::string field_to_string(const double& x) { return fmt_double(x); }
    static std::string field_to_string(const std::uint64_t& x) { return std::to_string(x); }
    static std::string field_to_string(const std::string& x) { return x; }
    template <class T>
    static std::string field_to_string(const std::vector<T>& xs) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) out += ", ";
            out += field_to_string(xs[i]);
        }
        return out;
    }

    static void assign_field(int& f, const std::string& v, const std::string& where) {
        f = static_cast<int>(detail::parse_int(v, where));
    }
    static void assign_field(bool& f, const std::string& v, const std::string& where) {
        if (v == "true" || v == "1") f = true;
        else if (v == "false" || v == "0") f = false;
        else throw ConfigError("config: bad boolean '" + v + "' for " + where);
    }
    static void assign_field(double& f, const std::string& v, const std::string& where) {
        f = detail::parse_double(v, where);
    }
    static void assign_field(std::uint64_t& f, const std::string& v, const std::string& where) {
        long long x = detail::parse_int(v, where);
        if (x < 0) throw ConfigError("config: negative value for " + where);
        f = static_cast<std::uint64_t>(x);
    }
    static void assign_field(std::string& f, const std::string& v, const std::string&) { f = v; }
    template <class T>
    static void assign_field(std::vector<T>& f, const std::string& v, const std::string& where) {
        std::vector<T> out;
        for (const auto& item : detail::split_commas(v)) {
            T x{};
            assign_field(x, item, where);
            out.push_back(x);
        }
        f = std::move(out);
    }
};

}  // namespace snls
