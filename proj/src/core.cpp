#include "xorsim/core.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace xorsim {

CacheAssignment place_caches(const SystemConfig& cfg, Rng& rng)
{
    const int F = cfg.n_packets();
    const int M = cfg.cache_size();
    if (M < 1 || M > F)
        throw ConfigError(fmt::format("cache_fraction: cache size {} outside 1..{}", M, F));

    CacheAssignment a;
    a.n_packets = F;
    a.contents.resize(cfg.n_caches);
    a.holders.assign(F, 0);
    std::vector<int> perm(F);
    for (int k = 0; k < cfg.n_caches; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = 0; i < M; ++i) {
            auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(F - i)));
            std::swap(perm[i], perm[j]);
        }
        auto& c = a.contents[k];
        c.assign(perm.begin(), perm.begin() + M);
        std::sort(c.begin(), c.end());
        for (int p : c)
            a.holders[p] |= CacheSet{1} << k;
    }
    return a;
}

CacheSet side_info_of(const std::vector<int>& packets, const CacheAssignment& caches)
{
    CacheSet s = caches.n_caches() >= 64 ? ~CacheSet{0} : (CacheSet{1} << caches.n_caches()) - 1;
    for (int p : packets)
        s &= caches.holders[p];
    return s;
}

QueueRecord gen_request(const SystemConfig& cfg, const Demand& demand, const CacheAssignment& caches,
                        Rng& rng, std::uint64_t& next_id)
{
    const int K = cfg.n_caches;
    const CacheSet all = K >= 64 ? ~CacheSet{0} : (CacheSet{1} << K) - 1;
    int packet = -1;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        int n = demand.sample_file(rng);
        int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.subfiles_per_file)));
        int p = n * cfg.subfiles_per_file + b;
        if ((caches.holders[p] & all) != all) {
            packet = p;
            break;
        }
    }
    if (packet < 0)
        throw GenerationExhausted(
            fmt::format("request generation: {} consecutive draws were cached everywhere", kMaxRejections));

    const CacheSet holders = caches.holders[packet];
    const int admissible = K - cache_count(holders);
    int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(admissible)));
    int dest = -1;
    for (int k = 0; k < K; ++k) {
        if (has_cache(holders, k))
            continue;
        if (pick-- == 0) {
            dest = k;
            break;
        }
    }

    QueueRecord r;
    r.dest = dest;
    r.packets = {packet};
    r.side_info = holders;
    r.deadline = static_cast<int>(rng.uniform_int(1, cfg.max_deadline));
    r.annotations = {next_id};
    r.insertion_order = next_id;
    ++next_id;
    return r;
}

} // namespace xorsim
