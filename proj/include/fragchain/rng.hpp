#pragma once

#include <cmath>
#include <cstdint>

// Counter-free splittable RNG. Every fragment, replicate and noise draw gets
// its own stream derived by folding integer tags into a parent stream, so
// results are reproducible regardless of traversal order or thread schedule.

namespace fragchain::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Fold a tag into a stream; distinct tags give distinct child streams.
constexpr std::uint64_t derive(std::uint64_t stream, std::uint64_t tag) {
    return splitmix64(stream ^ (kGolden * (tag + 1)));
}

//! Map a 64-bit word to [0,1) with 53-bit resolution.
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Draw tags. Child streams use kTagChildBase + child index so sibling draws
// never collide with a node's own draws.
inline constexpr std::uint64_t kTagPartition = 0;
inline constexpr std::uint64_t kTagLifetime  = 1;
inline constexpr std::uint64_t kTagNoise     = 2;
inline constexpr std::uint64_t kTagChildBase = 16;

//! Sequential splitmix64 stream.
class Stream {
public:
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    //! Uniform draw in [0,1).
    double next_unit() { return to_unit(next_u64()); }

    //! Uniform draw in [-1,1].
    double next_signed_unit() { return 2.0 * next_unit() - 1.0; }

    //! Exponential draw with the given rate.
    double next_exponential(double rate) {
        return -std::log1p(-next_unit()) / rate;
    }

    //! Independent child stream for the given tag.
    Stream child(std::uint64_t tag) const { return Stream(derive(state_, tag)); }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

//! Root stream for a user-facing seed.
inline Stream root_stream(std::uint64_t seed) {
    return Stream(splitmix64(seed ^ 0x5851f42d4c957f2dULL));
}

} // namespace fragchain::rng
