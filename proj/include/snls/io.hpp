// Artifact formats: binary snapshot files and packs, CSV tables, a minimal
// JSON writer, and file digests.
//
// Field file:  text header "SNLS1 <d> <N> <p> <s> <eps>[ <run>]\n", then the
//              coefficients as 64-bit float (re, im) pairs in basis order.
// Pack file:   "SNLSP1 <d> <N> <p> <s> <eps> <count>[ <run>]\n", then per
//              snapshot a 64-bit weight followed by the coefficient pairs.
// The optional <run> token names the producing run's manifest.
// Doubles are raw host doubles; the toolchain targets little-endian hosts.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "snls/field.hpp"

namespace snls {

struct FieldHeader {
    int d = 1;
    int N = 8;
    double p = 7.0;
    double s = 2.0;
    double eps = 0.1;
};

namespace detail {

inline void write_f64(std::ostream& os, double x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

inline double read_f64(std::istream& is) {
    double x = 0.0;
    is.read(reinterpret_cast<char*>(&x), sizeof x);
    if (!is) throw Error("binary read truncated");
    return x;
}

inline void write_coeffs(std::ostream& os, const SpectralField& u) {
    for (const cplx& c : u.c) {
        write_f64(os, c.real());
        write_f64(os, c.imag());
    }
}

inline void read_coeffs(std::istream& is, SpectralField& u) {
    for (cplx& c : u.c) {
        double re = read_f64(is);
        double im = read_f64(is);
        c = {re, im};
    }
}

}  // namespace detail

inline void save_field(const std::string& path, const SpectralField& u, const FieldHeader& h,
                       const std::string& run_id = "") {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for write: " + path);
    os << "SNLS1 " << h.d << ' ' << h.N << ' ' << fmt_double(h.p) << ' ' << fmt_double(h.s)
       << ' ' << fmt_double(h.eps);
    if (!run_id.empty()) os << ' ' << run_id;
    os << '\n';
    detail::write_coeffs(os, u);
    if (!os) throw Error("write failed: " + path);
}

inline SpectralField load_field(const std::string& path, FieldHeader* hdr = nullptr,
                                std::string* run_id = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open: " + path);
    std::string magic;
    FieldHeader h;
    is >> magic >> h.d >> h.N >> h.p >> h.s >> h.eps;
    if (!is || magic != "SNLS1") throw Error("not a SNLS1 field file: " + path);
    std::string rest;
    std::getline(is, rest);  // remainder of the header line, maybe a run id
    if (run_id) {
        auto b = rest.find_first_not_of(" \t\r");
        auto e = rest.find_last_not_of(" \t\r");
        *run_id = (b == std::string::npos) ? "" : rest.substr(b, e - b + 1);
    }
    SpectralField u(build_basis(h.d, h.N));
    detail::read_coeffs(is, u);
    if (hdr) *hdr = h;
    return u;
}

// The header line may carry one trailing token naming the producing run
// (a manifest id); absent on packs written before runs were tracked.
inline void save_pack(const std::string& path, const std::vector<SpectralField>& snaps,
                      const std::vector<double>& weights, const FieldHeader& h,
                      const std::string& run_id = "") {
    if (snaps.size() != weights.size()) throw Error("save_pack: weight count mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for write: " + path);
    os << "SNLSP1 " << h.d << ' ' << h.N << ' ' << fmt_double(h.p) << ' ' << fmt_double(h.s)
       << ' ' << fmt_double(h.eps) << ' ' << snaps.size();
    if (!run_id.empty()) os << ' ' << run_id;
    os << '\n';
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        detail::write_f64(os, weights[i]);
        detail::write_coeffs(os, snaps[i]);
    }
    if (!os) throw Error("write failed: " + path);
}

inline void load_pack(const std::string& path, std::vector<SpectralField>& snaps,
                      std::vector<double>& weights, FieldHeader* hdr = nullptr,
                      std::string* run_id = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open: " + path);
    std::string magic;
    FieldHeader h;
    std::size_t count = 0;
    is >> magic >> h.d >> h.N >> h.p >> h.s >> h.eps >> count;
    if (!is || magic != "SNLSP1") throw Error("not a SNLSP1 pack file: " + path);
    std::string rest;
    std::getline(is, rest);  // remainder of the header line, maybe a run id
    if (run_id) {
        auto b = rest.find_first_not_of(" \t\r");
        auto e = rest.find_last_not_of(" \t\r");
        *run_id = (b == std::string::npos) ? "" : rest.substr(b, e - b + 1);
    }
    auto basis = build_basis(h.d, h.N);
    snaps.clear();
    weights.clear();
    snaps.reserve(count);
    weights.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        weights.push_back(detail::read_f64(is));
        SpectralField u(basis);
        detail::read_coeffs(is, u);
        snaps.push_back(std::move(u));
    }
    if (hdr) *hdr = h;
}

// CSV with a fixed header row; numbers via fmt_double (shortest round-trip).
inline void save_csv(const std::string& path, const std::vector<std::string>& cols,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for write: " + path);
    for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j];
    os << '\n';
    for (const auto& r : rows) {
        if (r.size() != cols.size()) throw Error("save_csv: ragged row");
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << fmt_double(r[j]);
        os << '\n';
    }
}

// Minimal JSON value tree, enough for report and manifest emission.
class Json {
  public:
    static Json object() { Json j; j.kind_ = Kind::Object; return j; }
    static Json array() { Json j; j.kind_ = Kind::Array; return j; }
    static Json str(std::string v) { Json j; j.kind_ = Kind::Str; j.str_ = std::move(v); return j; }
    static Json num(double v) { Json j; j.kind_ = Kind::Num; j.num_ = v; return j; }
    static Json boolean(bool v) { Json j; j.kind_ = Kind::Bool; j.bool_ = v; return j; }

    Json& set(const std::string& key, Json v) {
        members_.emplace_back(key, std::move(v));
        return *this;
    }
    Json& set(const std::string& key, const std::string& v) { return set(key, str(v)); }
    Json& set(const std::string& key, const char* v) { return set(key, str(v)); }
    Json& set(const std::string& key, double v) { return set(key, num(v)); }
    Json& set(const std::string& key, int v) { return set(key, num(v)); }
    Json& set(const std::string& key, std::size_t v) {
        return set(key, num(static_cast<double>(v)));
    }
    Json& set(const std::string& key, bool v) { return set(key, boolean(v)); }
    Json& push(Json v) {
        items_.push_back(std::move(v));
        return *this;
    }
    static Json nums(const std::vector<double>& v) {
        Json a = array();
        for (double x : v) a.push(num(x));
        return a;
    }

    std::string dump(int indent = 0) const {
        std::ostringstream os;
        write(os, indent);
        return os.str();
    }

  private:
    enum class Kind { Object, Array, Str, Num, Bool };
    Kind kind_ = Kind::Object;
    std::string str_;
    double num_ = 0.0;
    bool bool_ = false;
    std::vector<std::pair<std::string, Json>> members_;
    std::vector<Json> items_;

    static void escape(std::ostream& os, const std::string& s) {
        os << '"';
        for (char ch : s) {
            switch (ch) {
                case '"': os << "\\\""; break;
                case '\\': os << "\\\\"; break;
                case '\n': os << "\\n"; break;
                case '\t': os << "\\t"; break;
                case '\r': os << "\\r"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                        os << buf;
                    } else {
                        os << ch;
                    }
            }
        }
        os << '"';
    }

    void write(std::ostream& os, int indent) const {
        std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        std::string pad1(static_cast<std::size_t>(indent + 1) * 2, ' ');
        switch (kind_) {
            case Kind::Str: escape(os, str_); break;
            case Kind::Num: os << fmt_double(num_); break;
            case Kind::Bool: os << (bool_ ? "true" : "false"); break;
            case Kind::Object: {
                if (members_.empty()) { os << "{}"; break; }
                os << "{\n";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    os << pad1;
                    escape(os, members_[i].first);
                    os << ": ";
                    members_[i].second.write(os, indent + 1);
                    os << (i + 1 < members_.size() ? ",\n" : "\n");
                }
                os << pad << '}';
                break;
            }
            case Kind::Array: {
                if (items_.empty()) { os << "[]"; break; }
                os << "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    os << pad1;
                    items_[i].write(os, indent + 1);
                    os << (i + 1 < items_.size() ? ",\n" : "\n");
                }
                os << pad << ']';
                break;
            }
        }
    }
};

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for write: " + path);
    os << text;
}

inline std::string load_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

inline std::uint64_t file_digest(const std::string& path) { return fnv1a64(load_text(path)); }

}  // namespace snls
