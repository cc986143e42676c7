#pragma once

#include "xorsim/config.hpp"
#include "xorsim/demand.hpp"
#include "xorsim/rng.hpp"

#include <bit>
#include <cstdint>
#include <vector>

namespace xorsim {

// Set of cache IDs, bit k set for cache k.
using CacheSet = std::uint64_t;

inline bool has_cache(CacheSet s, int k) { return (s >> k) & 1U; }
inline int cache_count(CacheSet s) { return std::popcount(s); }

struct CacheAssignment {
    int n_packets = 0;
    std::vector<std::vector<int>> contents; // sorted, one per cache
    std::vector<CacheSet> holders;          // per packet: which caches hold it

    bool holds(int cache, int packet) const { return has_cache(holders[packet], cache); }
    int n_caches() const { return static_cast<int>(contents.size()); }

    bool operator==(const CacheAssignment&) const = default;
};

// Each cache, in index order, draws floor(p_c F) distinct packets by a partial
// Fisher-Yates shuffle of 0..F-1 (one below() per selected packet).
CacheAssignment place_caches(const SystemConfig& cfg, Rng& rng);

struct QueueRecord {
    int dest = 0;                          // k_r
    std::vector<int> packets;              // f_r, sorted
    int deadline = 0;                      // d_r, signed so d <= 0 is literal
    CacheSet side_info = 0;                // S_r
    std::vector<std::uint64_t> annotations; // A(r), sorted request IDs
    std::uint64_t insertion_order = 0;

    bool operator==(const QueueRecord&) const = default;
};

// Caches holding every packet of the set.
CacheSet side_info_of(const std::vector<int>& packets, const CacheAssignment& caches);

inline constexpr int kMaxRejections = 1000000;

// Draw order: file (Demand::sample_file), subfile below(B), repeated while every
// cache holds the packet; then dest by below(#non-holders) over non-holders in
// ascending cache order; then deadline uniform_int(1, D). next_id supplies the
// request ID and the insertion counter and is incremented.
QueueRecord gen_request(const SystemConfig& cfg, const Demand& demand, const CacheAssignment& caches,
                        Rng& rng, std::uint64_t& next_id);

} // namespace xorsim
