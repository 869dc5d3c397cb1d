#pragma once

#include <array>
#include <cstdint>

#include "regimevol/stats.hpp"

namespace regimevol {

/**
 * @brief Philox4x32-10 counter-based generator.
 *
 * State is just (key, counter): the k-th draw of stream s under seed m is
 * a pure function of (m, s, k), so replications seeded as (master seed,
 * replication index) reproduce identically whether run serially or in
 * parallel, and repeated runs are bit-identical.
 */
class Philox4x32 {
public:
    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::uint64_t next_u64() {
        if (cache_pos_ >= 2) {
            fill_block();
            cache_pos_ = 0;
        }
        return cache_[cache_pos_++];
    }

    /// Uniform draw on the open interval (0,1).
    double uniform01() {
        // 53 random bits, centered inside the bin so 0 and 1 are excluded
        std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse CDF, keeping draws a pure function
    /// of the counter (no rejection loops).
    double normal() { return normal_quantile(uniform01()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Integer in [0, n)
    std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

private:
    void fill_block() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c0;
            std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c2;
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        cache_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
        cache_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
        ++counter_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> cache_{};
    int cache_pos_ = 2;
};

}  // namespace regimevol
