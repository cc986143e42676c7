#pragma once

#include "xorsim/engine.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace testutil {

using namespace xorsim;

// Hand-built state: caches given explicitly, records given as (dest, packets,
// deadline). Side information, annotations, ledgers and merge set are filled in.
struct RecordInit {
    int dest;
    std::vector<int> packets;
    int deadline;
};

inline SimState make_state(SystemConfig cfg, const std::vector<std::vector<int>>& contents,
                           const std::vector<RecordInit>& recs, std::uint64_t seed = 1)
{
    cfg.queue_depth = static_cast<int>(recs.size());
    cfg.n_caches = static_cast<int>(contents.size());
    SimState s;
    s.cfg = cfg;
    s.episode_seed = seed;
    s.rng = Rng(seed);
    s.erasure_rng = Rng(mix_seed(seed, kErasureStreamTag));
    s.demand = std::make_shared<const Demand>(cfg.demand_law, cfg.n_files);
    CacheAssignment a;
    a.n_packets = cfg.n_packets();
    a.contents = contents;
    a.holders.assign(a.n_packets, 0);
    for (int k = 0; k < static_cast<int>(contents.size()); ++k)
        for (int p : contents[k])
            a.holders[p] |= CacheSet{1} << k;
    s.caches = std::make_shared<const CacheAssignment>(a);
    s.served_files.assign(cfg.n_files, 0);
    for (const auto& r : recs) {
        QueueRecord q;
        q.dest = r.dest;
        q.packets = r.packets;
        q.deadline = r.deadline;
        q.side_info = side_info_of(q.packets, a);
        q.annotations = {s.next_request_id};
        q.insertion_order = s.next_request_id++;
        s.request_status.push_back(RequestStatus::Pending);
        s.queue.push_back(q);
    }
    s.merge_set = enumerate_merges(s.queue);
    return s;
}

// The three-request example: K = 3, Q = 3, packets p1 = 0, p2 = 1, p3 = 2 with
// C0 = {p2, p3}, C1 = {p1, p3}, C2 = {p1, p2}; r0 = (0, {p1}, 5),
// r1 = (1, {p2}, 3), r2 = (2, {p3}, 2).
inline SimState worked_example(std::uint64_t seed = 1)
{
    SystemConfig cfg;
    cfg.n_files = 3;
    cfg.subfiles_per_file = 1;
    cfg.cache_fraction = 0.7;
    cfg.max_deadline = 20;
    return make_state(cfg, {{1, 2}, {0, 2}, {0, 1}}, {{0, {0}, 5}, {1, {1}, 3}, {2, {2}, 2}}, seed);
}

inline std::string golden_path(const std::string& name) { return std::string(XORSIM_GOLDEN_DIR) + "/" + name; }

inline std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream f(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty() && line[0] != '#')
            out.push_back(line);
    return out;
}

} // namespace testutil
