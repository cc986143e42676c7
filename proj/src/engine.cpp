#include "xorsim/engine.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <iterator>

namespace xorsim {

bool SimState::same_as(const SimState& o) const
{
    return cfg == o.cfg && *demand == *o.demand && *caches == *o.caches && queue == o.queue &&
           step == o.step && rng == o.rng && erasure_rng == o.erasure_rng &&
           erasure_channel == o.erasure_channel && merge_set == o.merge_set &&
           next_request_id == o.next_request_id && episode_seed == o.episode_seed &&
           served_files == o.served_files && request_status == o.request_status && mutant == o.mutant;
}

namespace {

QueueRecord fresh(SimState& s)
{
    QueueRecord r = gen_request(s.cfg, *s.demand, *s.caches, s.rng, s.next_request_id);
    s.request_status.push_back(RequestStatus::Pending);
    return r;
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace

SimState reset(const SystemConfig& cfg, std::uint64_t episode_seed)
{
    cfg.validate();
    SimState s;
    s.cfg = cfg;
    s.episode_seed = episode_seed;
    s.rng = Rng(episode_seed);
    s.erasure_rng = Rng(mix_seed(episode_seed, kErasureStreamTag));
    s.erasure_channel = cfg.erasure_prob > 0.0;
    s.demand = std::make_shared<const Demand>(cfg.demand_law, cfg.n_files);
    s.caches = std::make_shared<const CacheAssignment>(place_caches(cfg, s.rng));
    s.served_files.assign(cfg.n_files, 0);
    s.queue.reserve(cfg.queue_depth);
    for (int q = 0; q < cfg.queue_depth; ++q)
        s.queue.push_back(fresh(s));
    s.merge_set = enumerate_merges(s.queue);
    return s;
}

bool xor_feasible(const QueueRecord& a, const QueueRecord& b)
{
    return has_cache(a.side_info, b.dest) && has_cache(b.side_info, a.dest);
}

std::vector<Pair> enumerate_merges(const std::vector<QueueRecord>& queue)
{
    std::vector<Pair> out;
    const int Q = static_cast<int>(queue.size());
    for (int i = 0; i < Q; ++i)
        for (int j = i + 1; j < Q; ++j)
            if (xor_feasible(queue[i], queue[j]))
                out.push_back({i, j});
    return out;
}

ActionMask action_mask(int n_merges, const SystemConfig& cfg)
{
    ActionMask m(cfg.action_count(), 0);
    for (int a = 0; a < cfg.action_count(); ++a)
        m[a] = (a / 2 < n_merges || a == cfg.unicast_action()) ? 1 : 0;
    return m;
}

ActionMask action_mask(const SimState& s) { return action_mask(s.n_merges(), s.cfg); }

bool action_valid(const SimState& s, int action)
{
    if (action < 0 || action >= s.cfg.action_count())
        return false;
    return action == s.cfg.unicast_action() || action / 2 < s.n_merges();
}

std::vector<int> merge_degrees(const SimState& s)
{
    std::vector<int> deg(s.queue.size(), 0);
    for (const auto& p : s.merge_set) {
        ++deg[p.i];
        ++deg[p.j];
    }
    return deg;
}

int edf_slot(const std::vector<QueueRecord>& queue)
{
    int best = 0;
    for (int q = 1; q < static_cast<int>(queue.size()); ++q)
        if (queue[q].deadline < queue[best].deadline)
            best = q;
    return best;
}

DecodedAction decode_action(int action, int n_merges, const SystemConfig& cfg)
{
    DecodedAction d;
    if (action != cfg.unicast_action() && action / 2 < n_merges) {
        d.unicast = false;
        d.pair_index = action / 2;
        d.keep_bit = action % 2;
    }
    return d;
}

MergeResult merge_records(const QueueRecord& ri, const QueueRecord& rj, int slot_i, int slot_j,
                          int keep_bit, Rng& rng, Mutant mutant)
{
    if (!xor_feasible(ri, rj))
        throw ContractViolation(fmt::format("merge of slots {} and {}: pair is not XOR-feasible", slot_i, slot_j));
    MergeResult m;
    QueueRecord& g = m.merged;
    g.packets = set_union(ri.packets, rj.packets);
    g.deadline = std::min(ri.deadline, rj.deadline);
    g.side_info = mutant == Mutant::UnionSideInfo ? (ri.side_info | rj.side_info) : (ri.side_info & rj.side_info);
    g.dest = rng.below(2) == 0 ? ri.dest : rj.dest;
    g.annotations.reserve(ri.annotations.size() + rj.annotations.size());
    std::set_union(ri.annotations.begin(), ri.annotations.end(), rj.annotations.begin(), rj.annotations.end(),
                   std::back_inserter(g.annotations));
    g.insertion_order = keep_bit == 0 ? ri.insertion_order : rj.insertion_order;
    m.kept_slot = keep_bit == 0 ? slot_i : slot_j;
    m.freed_slot = keep_bit == 0 ? slot_j : slot_i;
    return m;
}

const char* to_string(StepKind kind)
{
    switch (kind) {
    case StepKind::CodedMerge:
        return "coded";
    case StepKind::Unicast:
        return "unicast";
    case StepKind::ErasedMerge:
        return "erased";
    }
    return "unicast";
}

double potential(int n_merges, const SystemConfig& cfg)
{
    return static_cast<double>(n_merges) / static_cast<double>(cfg.max_pairs());
}

double shaping_reward(double phi_before, double phi_after, const RewardWeights& w)
{
    return w.shape * (w.shape_gamma * phi_after - phi_before);
}

double merge_quality(int side_info_size, int packet_count, const RewardWeights& w)
{
    return w.intersection * side_info_size - w.size_penalty * std::max(0, packet_count - 2);
}

StepOutcome step(SimState& s, int action)
{
    if (s.done())
        throw EpisodeFinished(fmt::format("step {}: episode already reached its horizon", s.step));
    if (action < 0 || action >= s.cfg.action_count())
        throw ContractViolation(fmt::format("action {} outside 0..{}", action, s.cfg.action_count() - 1));

    StepOutcome out;
    out.step = s.step;
    out.action = action;
    out.merges_before = s.n_merges();
    const double phi_before = potential(s);
    double quality = 0.0;
    std::vector<std::uint64_t> tx_ids;
    int deferred_refill = -1;

    // Phase 1: transmit.
    const DecodedAction dec = decode_action(action, s.n_merges(), s.cfg);
    if (!dec.unicast) {
        const Pair pr = s.merge_set[dec.pair_index];
        const QueueRecord& ri = s.queue[pr.i];
        const QueueRecord& rj = s.queue[pr.j];
        out.pair_index = dec.pair_index;
        out.pair = pr;
        out.keep_bit = dec.keep_bit;
        out.dest_i = ri.dest;
        out.dest_j = rj.dest;
        out.intersection = cache_count(ri.side_info & rj.side_info);

        bool erased = false;
        if (s.erasure_channel)
            erased = s.erasure_rng.uniform01() < s.cfg.erasure_prob;
        if (erased) {
            out.kind = StepKind::ErasedMerge;
        } else {
            MergeResult m = merge_records(ri, rj, pr.i, pr.j, dec.keep_bit, s.rng, s.mutant);
            out.kind = StepKind::CodedMerge;
            out.merged = m.merged;
            out.tx_packets = m.merged.packets;
            out.u = static_cast<int>(m.merged.packets.size());
            tx_ids = m.merged.annotations;
            quality = merge_quality(cache_count(m.merged.side_info), out.u);
            s.queue[m.kept_slot] = std::move(m.merged);
            if (s.mutant == Mutant::RefillAfterDecrement) {
                deferred_refill = m.freed_slot;
            } else {
                s.queue[m.freed_slot] = fresh(s);
                out.phase1_slot = m.freed_slot;
                out.phase1_order = s.queue[m.freed_slot].insertion_order;
            }
        }
    } else {
        const int slot = edf_slot(s.queue);
        out.kind = StepKind::Unicast;
        out.served_slot = slot;
        out.served_dest = s.queue[slot].dest;
        out.tx_packets = s.queue[slot].packets;
        out.u = 1;
        tx_ids = s.queue[slot].annotations;
        s.queue[slot] = fresh(s);
        out.phase1_slot = slot;
        out.phase1_order = s.queue[slot].insertion_order;
    }

    // Phase 2: every deadline ticks down.
    for (auto& r : s.queue)
        --r.deadline;
    if (deferred_refill >= 0) {
        s.queue[deferred_refill] = fresh(s);
        out.phase1_slot = deferred_refill;
        out.phase1_order = s.queue[deferred_refill].insertion_order;
    }

    // Phase 3: expirations, read from the post-decrement queue, then refilled.
    for (int q = 0; q < static_cast<int>(s.queue.size()); ++q) {
        if (s.queue[q].deadline <= 0) {
            out.expired.push_back(s.queue[q]);
            out.expired_slots.push_back(q);
            out.e += static_cast<int>(s.queue[q].packets.size());
            if (q == out.phase1_slot)
                out.phase1_expired = true;
        }
    }
    for (int q : out.expired_slots) {
        s.queue[q] = fresh(s);
        out.phase3_slots.push_back(q);
    }

    // Request ledgers.
    for (auto id : tx_ids) {
        if (s.request_status[id] == RequestStatus::Pending) {
            s.request_status[id] = RequestStatus::Completed;
            out.completed.push_back(id);
        }
    }
    for (const auto& r : out.expired) {
        for (auto id : r.annotations) {
            if (s.request_status[id] == RequestStatus::Pending) {
                s.request_status[id] = RequestStatus::Missed;
                out.missed.push_back(id);
            }
        }
    }
    std::sort(out.missed.begin(), out.missed.end());
    for (int p : out.tx_packets)
        s.served_files[p / s.cfg.subfiles_per_file] = 1;

    ++s.step;
    s.merge_set = enumerate_merges(s.queue);
    out.merges_after = s.n_merges();

    out.reward.base = kReward.served * out.u - kReward.expired * out.e;
    out.reward.quality = quality;
    out.reward.shape = shaping_reward(phi_before, potential(s));
    out.reward.total = out.reward.base + out.reward.quality + out.reward.shape;
    return out;
}

OneGapResult check_one_gap(const QueueRecord& r, const CacheAssignment& caches)
{
    OneGapResult res;
    for (int p : r.packets)
        if (!caches.holds(r.dest, p))
            res.gaps.push_back(p);
    res.ok = res.gaps.size() == 1;
    return res;
}

} // namespace xorsim
