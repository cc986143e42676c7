#pragma once

#include <cstdint>

namespace xorsim {

// SplitMix64 finalizer. Used both as the stream output function and to derive
// seeds from tuples.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// The repo-wide generator: SplitMix64, a counter-based 64-bit generator.
// Draw n (0-based) is splitmix64_mix(seed + (n + 1) * 0x9E3779B97F4A7C15).
// Every 64-bit output bumps draw_count(), including rejected ones.
//
// Derived draws:
//   below(n)    unbiased integer in [0, n) by rejection: draw x until
//               x < 2^64 - (2^64 mod n), return x mod n
//   uniform01() (x >> 11) * 2^-53, in [0, 1)
class Rng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed), draws_(0) {}

    std::uint64_t next_u64()
    {
        state_ += kGamma;
        ++draws_;
        return splitmix64_mix(state_);
    }

    std::uint64_t below(std::uint64_t n);
    // Uniform on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draw_count() const { return draws_; }

    bool operator==(const Rng&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    std::uint64_t draws_;
};

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Episode seed of the evaluation grid: 42 + s * 10^6 + e.
constexpr std::uint64_t episode_seed(std::uint64_t base_seed, std::uint64_t episode)
{
    return 42 + base_seed * 1000000ULL + episode;
}

} // namespace xorsim
