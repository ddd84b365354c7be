#pragma once

#include <array>
#include <cstdint>

namespace empcq {

// Threefry-2x64 with 20 rounds. Counter-based: every output is a pure
// function of (key, counter), so per-sample streams can be split off a
// single seed and evaluated in any order — sample i always sees the same
// draws no matter how work is scheduled across threads.
struct Threefry2x64 {
    static constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ull;

    static std::array<std::uint64_t, 2> block(std::uint64_t k0, std::uint64_t k1,
                                              std::uint64_t c0, std::uint64_t c1) {
        constexpr unsigned kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
        const std::uint64_t ks[3] = {k0, k1, kParity ^ k0 ^ k1};
        std::uint64_t x0 = c0 + ks[0];
        std::uint64_t x1 = c1 + ks[1];
        for (unsigned i = 0; i < 20; ++i) {
            x0 += x1;
            const unsigned r = kRot[i % 8];
            x1 = (x1 << r) | (x1 >> (64 - r));
            x1 ^= x0;
            if (i % 4 == 3) {
                const std::uint64_t s = i / 4 + 1;
                x0 += ks[s % 3];
                x1 += ks[(s + 1) % 3] + s;
            }
        }
        return {x0, x1};
    }
};

// Stream id layout: purpose tag in the top 16 bits, element index below.
// Distinct purposes never collide even for overlapping index ranges.
constexpr std::uint64_t make_stream(std::uint32_t purpose, std::uint64_t index) {
    return (static_cast<std::uint64_t>(purpose) << 48) | (index & 0xFFFFFFFFFFFFull);
}

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : k0_(seed), k1_(stream) {}

    std::uint64_t next_u64() {
        if (have_pending_) {
            have_pending_ = false;
            return pending_;
        }
        const auto b = Threefry2x64::block(k0_, k1_, ctr_++, 0);
        pending_ = b[1];
        have_pending_ = true;
        return b[0];
    }

    // [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double next_unit_positive() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // [0, bound), rejection-sampled, bound > 0
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::uint64_t k0_;
    std::uint64_t k1_;
    std::uint64_t ctr_ = 0;
    std::uint64_t pending_ = 0;
    bool have_pending_ = false;
};

}  // namespace empcq
