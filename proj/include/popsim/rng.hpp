#pragma once

#include <cstdint>
#include <random>

namespace popsim {

namespace detail {

// splitmix64; standard finalizer used to decorrelate seed material.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return splitmix64(s);
}

} // namespace detail

// Deterministic random stream. Identical seed => identical draw sequence,
// independent of platform (mt19937_64 is fully specified by the standard and
// all derived draws below avoid implementation-defined distributions).
//
// Substreams for run k of a sweep are derived from (master seed, indices) by
// seed mixing, so trials can execute in parallel with no shared state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    static RngStream derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
        return RngStream(detail::mix(detail::mix(master, a), b));
    }

    RngStream substream(std::uint64_t index) const {
        return RngStream(detail::mix(seed_, index));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t position() const { return position_; }

    std::uint64_t next_u64() {
        ++position_;
        return engine_();
    }

    // Unbiased draw from {0, ..., bound-1} by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound; // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return uniform01() < p;
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t position_ = 0;
    std::mt19937_64 engine_;
};

} // namespace popsim
