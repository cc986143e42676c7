#include "helpers.hpp"

#include "xorsim/errors.hpp"
#include "xorsim/policy.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace xorsim;
using namespace testutil;

namespace {

bool subset_of_cache(const std::vector<int>& f, const std::vector<int>& cache)
{
    return std::includes(cache.begin(), cache.end(), f.begin(), f.end());
}

std::vector<Pair> brute_force_merges(const SimState& s)
{
    std::vector<Pair> out;
    const int q = static_cast<int>(s.queue.size());
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j)
            if (subset_of_cache(s.queue[i].packets, s.caches->contents[s.queue[j].dest]) &&
                subset_of_cache(s.queue[j].packets, s.caches->contents[s.queue[i].dest]))
                out.push_back({i, j});
    return out;
}

// Random queue of multi-packet records over a fresh placement. Destinations are
// drawn freely so that some records violate the usual admissibility; the merge
// rule does not depend on it.
SimState random_queue(Rng& r)
{
    SystemConfig cfg;
    cfg.n_files = 4;
    cfg.subfiles_per_file = 5;
    cfg.cache_fraction = 0.6;
    const CacheAssignment a = place_caches(cfg, r);
    std::vector<RecordInit> recs;
    for (int q = 0; q < 10; ++q) {
        std::vector<int> f;
        const int n = 1 + static_cast<int>(r.below(3));
        while (static_cast<int>(f.size()) < n) {
            int p = static_cast<int>(r.below(cfg.n_packets()));
            if (std::find(f.begin(), f.end(), p) == f.end())
                f.push_back(p);
        }
        std::sort(f.begin(), f.end());
        recs.push_back({static_cast<int>(r.below(5)), f, 1 + static_cast<int>(r.below(20))});
    }
    return make_state(cfg, a.contents, recs);
}

} // namespace

TEST_CASE("worked example: all three pairs are feasible in lexicographic order")
{
    const SimState s = worked_example();
    CHECK(s.queue[0].side_info == CacheSet{0b110});
    CHECK(s.queue[1].side_info == CacheSet{0b101});
    CHECK(xor_feasible(s.queue[0], s.queue[1]));
    CHECK(s.merge_set == std::vector<Pair>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(s.merge_set == brute_force_merges(s));
}

TEST_CASE("worked example: merge of r0 and r1, then chaining with r2")
{
    const SimState s = worked_example();
    Rng r(3);
    const MergeResult m = merge_records(s.queue[0], s.queue[1], 0, 1, 0, r);
    CHECK(m.merged.packets == std::vector<int>{0, 1});
    CHECK(m.merged.deadline == 3);
    CHECK(m.merged.side_info == CacheSet{0b100});
    CHECK((m.merged.dest == 0 || m.merged.dest == 1));
    CHECK(m.merged.annotations == std::vector<std::uint64_t>{0, 1});
    CHECK(m.kept_slot == 0);
    CHECK(m.freed_slot == 1);
    CHECK(r.draw_count() == 1);

    // Representative k_mg = 0: cache 0 holds p2 but not p1, so the gap is p1.
    QueueRecord agg = m.merged;
    agg.dest = 0;
    const OneGapResult g = check_one_gap(agg, *s.caches);
    CHECK(g.ok);
    CHECK(g.gaps == std::vector<int>{0});

    // With k_mg = 0 the aggregate still merges with r2 (p3 in C0, p1 and p2 in C2).
    CHECK(xor_feasible(agg, s.queue[2]));
    const MergeResult m2 = merge_records(agg, s.queue[2], 0, 2, 0, r);
    CHECK(m2.merged.packets.size() == 3);
    CHECK(m2.merged.side_info == CacheSet{0});
    CHECK(check_one_gap(m2.merged, *s.caches).ok);
}

TEST_CASE("merge_records rejects an infeasible pair")
{
    SystemConfig cfg;
    cfg.n_files = 3;
    cfg.subfiles_per_file = 1;
    cfg.cache_fraction = 0.4;
    SimState s = make_state(cfg, {{1}, {2}, {0}}, {{0, {0}, 5}, {1, {1}, 3}, {2, {2}, 2}});
    CHECK(s.merge_set.empty());
    Rng r(1);
    CHECK_THROWS_AS(merge_records(s.queue[0], s.queue[1], 0, 1, 0, r), ContractViolation);
}

TEST_CASE("empty side information means no merges")
{
    SystemConfig cfg;
    cfg.n_files = 3;
    cfg.subfiles_per_file = 1;
    cfg.cache_fraction = 0.4;
    const SimState s = make_state(cfg, {{}, {}, {}}, {{0, {0}, 5}, {1, {1}, 3}, {2, {2}, 2}});
    CHECK(s.merge_set.empty());
    const ActionMask m = action_mask(s);
    CHECK(std::count(m.begin(), m.end(), 1) == 1);
    CHECK(m.back() == 1);
}

TEST_CASE("keep bit only moves the aggregate")
{
    const SimState s = worked_example();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng a(seed), b(seed);
        const MergeResult m0 = merge_records(s.queue[0], s.queue[2], 0, 2, 0, a);
        const MergeResult m1 = merge_records(s.queue[0], s.queue[2], 0, 2, 1, b);
        CHECK(m0.merged.packets == m1.merged.packets);
        CHECK(m0.merged.deadline == m1.merged.deadline);
        CHECK(m0.merged.side_info == m1.merged.side_info);
        CHECK(m0.merged.dest == m1.merged.dest);
        CHECK(m0.merged.annotations == m1.merged.annotations);
        // Insertion order travels with the kept slot.
        CHECK(m0.merged.insertion_order == s.queue[0].insertion_order);
        CHECK(m1.merged.insertion_order == s.queue[2].insertion_order);
        CHECK(m0.kept_slot == 0);
        CHECK(m0.freed_slot == 2);
        CHECK(m1.kept_slot == 2);
        CHECK(m1.freed_slot == 0);
    }
}

TEST_CASE("representative destination is a fair coin over the two endpoints")
{
    const SimState s = worked_example();
    Rng r(99);
    int zero = 0;
    const int n = 20000;
    for (int t = 0; t < n; ++t)
        zero += merge_records(s.queue[0], s.queue[1], 0, 1, t & 1, r).merged.dest == 0;
    CHECK(std::fabs(zero - n / 2.0) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("action mask examples at Q = 10")
{
    SystemConfig cfg;
    auto count = [](const ActionMask& m) { return std::count(m.begin(), m.end(), 1); };
    const ActionMask m0 = action_mask(0, cfg);
    REQUIRE(m0.size() == 91);
    CHECK(count(m0) == 1);
    CHECK(m0[90] == 1);

    const ActionMask m3 = action_mask(3, cfg);
    CHECK(count(m3) == 7);
    for (int a = 0; a < 6; ++a)
        CHECK(m3[a] == 1);
    CHECK(m3[90] == 1);
    CHECK(91 - count(m3) == 84);

    CHECK(count(action_mask(45, cfg)) == 91);
}

TEST_CASE("action decoding")
{
    SystemConfig cfg;
    const DecodedAction d = decode_action(7, 5, cfg);
    CHECK_FALSE(d.unicast);
    CHECK(d.pair_index == 3);
    CHECK(d.keep_bit == 1);
    CHECK(decode_action(90, 45, cfg).unicast);
    CHECK(decode_action(10, 5, cfg).unicast); // pair 5 does not exist
    CHECK(encode_action(3, 1) == 7);
}

TEST_CASE("potential and shaping arithmetic")
{
    SystemConfig cfg;
    CHECK(potential(0, cfg) == 0.0);
    CHECK(potential(45, cfg) == 1.0);
    CHECK(potential(9, cfg) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(shaping_reward(0, 0) == 0.0);
    CHECK(std::fabs(shaping_reward(0.2, 0.2) - (-0.0002)) < 1e-12);
    CHECK(std::fabs(shaping_reward(0.0, 1.0) - 0.199) < 1e-12);
}

TEST_CASE("merge quality weights")
{
    CHECK(std::fabs(merge_quality(1, 2) - 0.75) < 1e-12);
    CHECK(std::fabs(merge_quality(0, 3) - (-0.15)) < 1e-12);
    CHECK(std::fabs(merge_quality(2, 4) - (1.5 - 0.30)) < 1e-12);
}

TEST_CASE("step: unicast of a singleton")
{
    SimState s = worked_example();
    s.queue[0].deadline = s.queue[1].deadline = s.queue[2].deadline = 10;
    const StepOutcome o = step(s, s.cfg.unicast_action());
    CHECK(o.kind == StepKind::Unicast);
    CHECK(o.served_slot == 0);
    CHECK(o.u == 1);
    CHECK(o.e == 0);
    CHECK(o.reward.base == 1.0);
    CHECK(o.reward.quality == 0.0);
    CHECK(o.reward.total == o.reward.base + o.reward.quality + o.reward.shape);
    CHECK(o.completed == std::vector<std::uint64_t>{0});
    CHECK(s.step == 1);
}

TEST_CASE("step: EDF breaks deadline ties by slot")
{
    SimState s = worked_example();
    s.queue[0].deadline = 9;
    s.queue[1].deadline = 4;
    s.queue[2].deadline = 4;
    CHECK(edf_slot(s.queue) == 1);
    CHECK(step(s, s.cfg.unicast_action()).served_slot == 1);
}

TEST_CASE("step: coded merge of two singletons with one shared cache")
{
    SimState s = worked_example();
    s.queue[2].deadline = 10;
    const StepOutcome o = step(s, encode_action(0, 0));
    CHECK(o.kind == StepKind::CodedMerge);
    CHECK(o.pair == Pair{0, 1});
    CHECK(o.intersection == 1);
    CHECK(o.u == 2);
    CHECK(std::fabs(o.reward.quality - 0.75) < 1e-12);
    CHECK(o.reward.base == 2.0);
    CHECK(o.phase1_slot == 1);
    CHECK(s.queue[0].packets == std::vector<int>{0, 1});
    CHECK(s.queue[0].deadline == 2);
}

TEST_CASE("step: invalid coded index falls through to unicast")
{
    SimState s = worked_example();
    s.queue[2].packets = {0};
    s.queue[2].side_info = side_info_of({0}, *s.caches);
    s.merge_set = enumerate_merges(s.queue);
    REQUIRE(s.n_merges() == 2);
    const StepOutcome o = step(s, encode_action(2, 0));
    CHECK(o.kind == StepKind::Unicast);
    CHECK(o.served_slot == 2);
}

TEST_CASE("step: a Phase-1 refill drawn with d = 1 expires in the same step")
{
    SystemConfig cfg;
    bool seen = false;
    for (std::uint64_t seed = 0; seed < 200 && !seen; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const StepOutcome o = step(s, cfg.unicast_action());
            if (o.phase1_expired) {
                seen = true;
                CHECK(std::find(o.expired_slots.begin(), o.expired_slots.end(), o.phase1_slot) !=
                      o.expired_slots.end());
                const auto it = std::find_if(o.expired.begin(), o.expired.end(), [&](const QueueRecord& r) {
                    return r.insertion_order == o.phase1_order;
                });
                REQUIRE(it != o.expired.end());
                CHECK(it->deadline == 0);
                CHECK(!o.missed.empty());
                break;
            }
        }
    }
    CHECK(seen);
}

TEST_CASE("step: refill deadline domains at the next decision step")
{
    SystemConfig cfg;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const int a = sacm_family(s, SacmVariant::SacmPlusPlus);
            const StepOutcome o = step(s, a);
            for (int q : o.phase3_slots) {
                CHECK(s.queue[q].deadline >= 1);
                CHECK(s.queue[q].deadline <= cfg.max_deadline);
            }
            if (o.phase1_slot >= 0 && !o.phase1_expired) {
                CHECK(s.queue[o.phase1_slot].deadline >= 1);
                CHECK(s.queue[o.phase1_slot].deadline <= cfg.max_deadline - 1);
            }
        }
    }
}

TEST_CASE("step: horizon is enforced")
{
    SystemConfig cfg;
    cfg.horizon = 3;
    SimState s = reset(cfg, 5);
    for (int t = 0; t < 3; ++t)
        step(s, cfg.unicast_action());
    CHECK(s.done());
    CHECK_THROWS_AS(step(s, cfg.unicast_action()), EpisodeFinished);
}

TEST_CASE("merge set matches a brute-force subset oracle on random queues")
{
    Rng r(2024);
    for (int t = 0; t < 10000; ++t) {
        const SimState s = random_queue(r);
        REQUIRE(s.merge_set == brute_force_merges(s));
        const ActionMask m = action_mask(s);
        for (int a = 0; a < s.cfg.unicast_action(); ++a)
            CHECK(bool(m[a]) == (a / 2 < s.n_merges()));
    }
}

TEST_CASE("merge invariants over engine-produced aggregates")
{
    SystemConfig cfg;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const int a = gcm(s);
            if (a != cfg.unicast_action()) {
                const Pair p = s.merge_set[a / 2];
                const QueueRecord ri = s.queue[p.i], rj = s.queue[p.j];
                const StepOutcome o = step(s, a);
                CHECK((o.merged.side_info & ~(ri.side_info & rj.side_info)) == 0);
                CHECK((o.merged.dest == ri.dest || o.merged.dest == rj.dest));
                CHECK(check_one_gap(o.merged, *s.caches).ok);
            } else {
                step(s, a);
            }
            for (const auto& r : s.queue)
                CHECK(check_one_gap(r, *s.caches).ok);
        }
    }
}

TEST_CASE("request ledgers partition the generated IDs")
{
    SystemConfig cfg;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const StepOutcome o = step(s, sacm_family(s, SacmVariant::SacmPlusPlus));
            for (auto id : o.completed)
                for (auto m : o.missed)
                    CHECK(id != m);
        }
        CHECK(s.request_status.size() == s.next_request_id);
        for (const auto& r : s.queue)
            for (auto id : r.annotations)
                CHECK(s.request_status[id] != RequestStatus::Missed);
    }
}

TEST_CASE("clone: identical actions give identical outcomes")
{
    SystemConfig cfg;
    SimState a = reset(cfg, 31);
    for (int t = 0; t < 7; ++t)
        step(a, gcm(a));
    SimState b = clone_env(a);
    CHECK(a.same_as(b));
    CHECK(a.rng.draw_count() == b.rng.draw_count());
    for (int t = 0; t < 10; ++t) {
        const int act = sacm_family(a, SacmVariant::SacmPlusPlus);
        const StepOutcome oa = step(a, act);
        const StepOutcome ob = step(b, act);
        CHECK(oa.u == ob.u);
        CHECK(oa.e == ob.e);
        CHECK(oa.reward.total == ob.reward.total);
        CHECK(oa.completed == ob.completed);
        CHECK(a.rng == b.rng);
    }
    CHECK(a.same_as(b));
}

TEST_CASE("clone: diverging actions do not alias")
{
    SystemConfig cfg;
    SimState a = reset(cfg, 12);
    while (a.n_merges() == 0)
        step(a, cfg.unicast_action());
    SimState b = clone_env(a);
    step(a, encode_action(0, 0));
    step(b, cfg.unicast_action());
    CHECK_FALSE(a.same_as(b));
    SimState c = clone_env(a);
    step(c, cfg.unicast_action());
    CHECK(c.step == a.step + 1);
}
