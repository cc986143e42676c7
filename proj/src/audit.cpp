#include "xorsim/audit.hpp"
#include "xorsim/errors.hpp"
#include "xorsim/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace xorsim {

bool AuditReport::ok() const { return total_violations() == 0; }

long AuditReport::total_violations() const
{
    long n = 0;
    for (const auto& c : checks)
        n += c.violations;
    return n;
}

const AuditCheck& AuditReport::check(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return c;
    throw ContractViolation(fmt::format("audit: no check named '{}'", name));
}

std::string AuditReport::render() const
{
    std::string s;
    for (const auto& c : checks) {
        s += fmt::format("{:<22} trials {:>9} violations {:>6}  {}\n", c.name, c.trials, c.violations,
                         c.violations ? "FAIL" : "ok");
        if (c.violations)
            s += fmt::format("  first: {}\n", c.witness);
    }
    s += fmt::format("phase-1 same-step expiry {}/{} = {:.5f}, 99% interval around 1/D [{:.5f}, {:.5f}]\n",
                     phase1_same_step, phase1_refills,
                     phase1_refills ? static_cast<double>(phase1_same_step) / phase1_refills : 0.0, freq_lo, freq_hi);
    s += fmt::format("total violations {}\n", total_violations());
    return s;
}

bool feasible_bruteforce(const QueueRecord& a, const QueueRecord& b, const CacheAssignment& caches)
{
    auto subset = [&](const std::vector<int>& f, int k) {
        const auto& c = caches.contents[k];
        return std::all_of(f.begin(), f.end(), [&](int p) { return std::binary_search(c.begin(), c.end(), p); });
    };
    return subset(a.packets, b.dest) && subset(b.packets, a.dest);
}

namespace {

CacheSet side_info_bruteforce(const std::vector<int>& f, const CacheAssignment& caches)
{
    CacheSet s = 0;
    for (int k = 0; k < caches.n_caches(); ++k) {
        const auto& c = caches.contents[k];
        if (std::all_of(f.begin(), f.end(), [&](int p) { return std::binary_search(c.begin(), c.end(), p); }))
            s |= CacheSet{1} << k;
    }
    return s;
}

struct Tally {
    AuditCheck c;
    explicit Tally(std::string n) { c.name = std::move(n); }
    void trial(bool ok, const std::string& what = {})
    {
        ++c.trials;
        if (!ok) {
            if (c.violations == 0)
                c.witness = what;
            ++c.violations;
        }
    }
};

} // namespace

AuditReport run_audit(const AuditOptions& opts)
{
    opts.cfg.validate();
    const int D = opts.cfg.max_deadline;
    const int H = opts.cfg.horizon;
    Rng pick(opts.seed);

    Tally one_gap("one-gap"), mask("mask-parity"), shrink("side-info-shrink"), kmg("kmg-endpoint"),
        partition("request-partition"), refill("refill-timing"), reward("reward-identity"),
        identity("metric-identity");
    AuditReport rep;

    long steps = 0;
    for (std::uint64_t ep = 0; steps < opts.n_steps; ++ep) {
        SimState s = reset(opts.cfg, mix_seed(opts.seed, ep));
        s.mutant = opts.mutant;
        EpisodeMetrics acc(s.cfg);
        std::set<std::uint64_t> done_ids, missed_ids;
        double base_sum = 0.0;

        while (!s.done()) {
            // Merge set and mask against the brute-force subset test.
            {
                std::vector<Pair> bf;
                for (int i = 0; i < s.cfg.queue_depth; ++i)
                    for (int j = i + 1; j < s.cfg.queue_depth; ++j)
                        if (feasible_bruteforce(s.queue[i], s.queue[j], *s.caches))
                            bf.push_back({i, j});
                const ActionMask m = action_mask(s);
                bool ok = bf == s.merge_set;
                for (int a = 0; a < s.cfg.action_count() && ok; ++a) {
                    const bool want = a == s.cfg.unicast_action() || a / 2 < static_cast<int>(bf.size());
                    ok = (m[a] != 0) == want;
                    if (ok && m[a] && a != s.cfg.unicast_action()) {
                        const Pair p = bf[a / 2];
                        ok = feasible_bruteforce(s.queue[p.i], s.queue[p.j], *s.caches);
                    }
                }
                mask.trial(ok, fmt::format("episode {} step {}: |M| engine {} brute force {}", ep, s.step,
                                           s.merge_set.size(), bf.size()));
            }

            int a = s.cfg.unicast_action();
            if (!s.merge_set.empty() && pick.uniform01() < opts.coded_bias)
                a = static_cast<int>(pick.below(2 * s.merge_set.size()));

            const DecodedAction dec = decode_action(a, s.n_merges(), s.cfg);
            QueueRecord ri, rj;
            if (!dec.unicast) {
                ri = s.queue[s.merge_set[dec.pair_index].i];
                rj = s.queue[s.merge_set[dec.pair_index].j];
            }

            const StepOutcome o = step(s, a);
            acc.accumulate(o);
            ++steps;
            base_sum += o.reward.base;

            if (o.kind == StepKind::CodedMerge) {
                const CacheSet S = o.merged.side_info;
                const CacheSet inter = ri.side_info & rj.side_info;
                shrink.trial((S & ~inter) == 0 && S == side_info_bruteforce(o.merged.packets, *s.caches),
                             fmt::format("episode {} step {}: S_mg {:#x} vs S_i & S_j {:#x}", ep, o.step, S, inter));
                kmg.trial(o.merged.dest == ri.dest || o.merged.dest == rj.dest,
                          fmt::format("episode {} step {}: k_mg {} not in {{{}, {}}}", ep, o.step, o.merged.dest,
                                      ri.dest, rj.dest));
            }

            for (const auto& r : s.queue) {
                const OneGapResult g = check_one_gap(r, *s.caches);
                one_gap.trial(g.ok, fmt::format("episode {} step {}: dest {} has {} gaps", ep, o.step, r.dest,
                                                g.gaps.size()));
            }

            // Phase-1 refill: post-decrement domain {0..D-1}; 0 means it expired
            // this step. Phase-3 refills enter the next step with {1..D}.
            if (o.phase1_slot >= 0) {
                ++rep.phase1_refills;
                if (o.phase1_expired) {
                    ++rep.phase1_same_step;
                    refill.trial(true);
                } else {
                    const QueueRecord& r = s.queue[o.phase1_slot];
                    const bool same = r.insertion_order == o.phase1_order;
                    refill.trial(same && r.deadline >= 1 && r.deadline <= D - 1,
                                 fmt::format("episode {} step {}: phase-1 refill in slot {} has deadline {}", ep,
                                             o.step, o.phase1_slot, r.deadline));
                }
            }
            for (int q : o.phase3_slots) {
                const int d = s.queue[q].deadline;
                refill.trial(d >= 1 && d <= D,
                             fmt::format("episode {} step {}: phase-3 refill deadline {}", ep, o.step, d));
            }

            reward.trial(o.reward.total == o.reward.base + o.reward.quality + o.reward.shape &&
                             o.reward.base == static_cast<double>(o.u - o.e),
                         fmt::format("episode {} step {}: reward components do not add up", ep, o.step));

            for (auto id : o.completed)
                done_ids.insert(id);
            for (auto id : o.missed)
                missed_ids.insert(id);
            {
                std::vector<std::uint64_t> both;
                std::set_intersection(o.completed.begin(), o.completed.end(), o.missed.begin(), o.missed.end(),
                                      std::back_inserter(both));
                partition.trial(both.empty(), fmt::format("episode {} step {}: C_t and M_t overlap", ep, o.step));
            }
        }

        // Request-ID partition: every ID completed, missed, or pending in the queue.
        {
            std::set<std::uint64_t> live;
            for (const auto& r : s.queue)
                live.insert(r.annotations.begin(), r.annotations.end());
            bool ok = true;
            std::string why;
            for (std::uint64_t id = 0; id < s.next_request_id && ok; ++id) {
                const int in = static_cast<int>(done_ids.count(id)) + static_cast<int>(missed_ids.count(id));
                const bool pending = in == 0;
                RequestStatus want = done_ids.count(id) ? RequestStatus::Completed
                                     : missed_ids.count(id) ? RequestStatus::Missed
                                                            : RequestStatus::Pending;
                ok = in <= 1 && (!pending || live.count(id)) && s.request_status[id] == want;
                if (!ok)
                    why = fmt::format("episode {}: request {} completed={} missed={} live={}", ep, id,
                                      done_ids.count(id), missed_ids.count(id), live.count(id));
            }
            partition.trial(ok, why);
        }

        // Metric identities.
        {
            const EpisodeSummary m = acc.finalize();
            const bool ok = m.rho_uniq == 1.0 - m.delta && sigma_recovers(m.sigma, H, m.sum_u - m.sum_e) &&
                            base_sum == m.sum_u - m.sum_e;
            identity.trial(ok, fmt::format("episode {}: rho_uniq {} delta {} sigma*H {} U-E {}", ep, m.rho_uniq,
                                           m.delta, m.sigma * H, m.sum_u - m.sum_e));
        }
    }

    rep.checks = {one_gap.c, mask.c, shrink.c, kmg.c, partition.c, refill.c, reward.c, identity.c};

    // Same-step expiry ~ Binomial(n, 1/D).
    Tally freq("same-step-expiry");
    const double p = 1.0 / D;
    const double n = static_cast<double>(rep.phase1_refills);
    const double half = 2.5758293035489 * std::sqrt(p * (1 - p) / std::max(1.0, n));
    rep.freq_lo = p - half;
    rep.freq_hi = p + half;
    const double f = n > 0 ? rep.phase1_same_step / n : 0.0;
    freq.c.trials = 1;
    if (!(f >= rep.freq_lo && f <= rep.freq_hi)) {
        freq.c.violations = 1;
        freq.c.witness = fmt::format("observed {:.5f} outside [{:.5f}, {:.5f}]", f, rep.freq_lo, rep.freq_hi);
    }
    rep.checks.push_back(freq.c);
    return rep;
}

} // namespace xorsim
