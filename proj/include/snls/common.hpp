// Shared aliases, error types and small utilities used across the library.
#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace snls {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double TWO_PI = 2.0 * PI;
inline constexpr const char* TOOL_VERSION = "0.1.0";

// Exponents of e^rho are clamped here before exponentiation; callers get a
// saturation flag instead of inf.
inline constexpr double EXP_SATURATION = 700.0;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Thrown by integrators when the solution leaves the trusted regime.
struct BlowupError : Error {
    double time;
    double norm;
    BlowupError(double t, double n)
        : Error("blow-up detected at t=" + std::to_string(t) +
                " (norm=" + std::to_string(n) + ")"),
          time(t), norm(n) {}
};

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest round-trip decimal form; used everywhere a double goes into text.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char s[40];
            std::snprintf(s, sizeof s, "%.*g", prec, v);
            if (std::strtod(s, nullptr) == v) return s;
        }
    }
    return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace snls
