// Counter-based RNG: Philox4x32-10 keyed by (seed, stream).
//
// Every sampled object in the library draws from an RngStream addressed by a
// (seed, stream-index) pair, so results are independent of thread scheduling
// and identical across reruns. Streams with different indices are statistically
// independent; jumping to an arbitrary position is O(1).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "snls/common.hpp"

namespace snls {

namespace detail {

struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static void mulhilo(std::uint32_t a, std::uint32_t b,
                        std::uint32_t& hi, std::uint32_t& lo) {
        std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(prod >> 32);
        lo = static_cast<std::uint32_t>(prod);
    }

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(M0, ctr[0], hi0, lo0);
            mulhilo(M1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

}  // namespace detail

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Uniform in [0,1), 53 random bits.
    double uniform() {
        std::uint64_t r = next_u64();
        return static_cast<double>(r >> 11) * 0x1.0p-53;
    }

    // Uniform in (0,1): never 0, safe under log().
    double uniform_pos() {
        std::uint64_t r = next_u64();
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = TWO_PI * u2;
        cached_ = r * std::sin(th);
        have_cached_ = true;
        return r * std::cos(th);
    }

    cplx gaussian_pair() {
        double a = gaussian();
        double b = gaussian();
        return {a, b};
    }

    std::uint64_t next_u64() {
        if (phase_ == 0) {
            auto out = detail::Philox4x32::block(
                {static_cast<std::uint32_t>(counter_),
                 static_cast<std::uint32_t>(counter_ >> 32),
                 static_cast<std::uint32_t>(stream_),
                 static_cast<std::uint32_t>(stream_ >> 32)},
                {static_cast<std::uint32_t>(seed_),
                 static_cast<std::uint32_t>(seed_ >> 32)});
            lo_ = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
            hi_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
            ++counter_;
            phase_ = 1;
            return lo_;
        }
        phase_ = 0;
        return hi_;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t lo_ = 0, hi_ = 0;
    int phase_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Stable stream-index derivation for named substreams (chains, bootstrap, ...).
inline std::uint64_t substream(std::uint64_t base, std::uint64_t n) {
    return base * 0x9E3779B97F4A7C15ull + n + 1;
}

}  // namespace snls
