#include "xorsim/rng.hpp"
#include "xorsim/errors.hpp"

#include <limits>

namespace xorsim {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return splitmix64_mix(splitmix64_mix(a + Rng::kGamma) ^ (b + 2 * Rng::kGamma));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return mix_seed(mix_seed(a, b), c);
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0)
        throw ContractViolation("Rng::below: empty range");
    // 2^64 mod n, computed without overflow.
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem; // inclusive
    for (;;) {
        std::uint64_t x = next_u64();
        if (rem == 0 || x <= limit)
            return x % n;
    }
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
        throw ContractViolation("Rng::uniform_int: empty range");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

} // namespace xorsim
