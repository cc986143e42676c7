#include "xorsim/policy.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <numeric>
#include <tuple>

namespace xorsim {

int ed_unicast(const SimState& s) { return s.cfg.unicast_action(); }

int gcm(const SimState& s) { return s.merge_set.empty() ? s.cfg.unicast_action() : encode_action(0, 0); }

namespace {

std::vector<int> union_of(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace

int sacm_family(const SimState& s, SacmVariant v)
{
    if (s.merge_set.empty())
        return s.cfg.unicast_action();

    const auto& q = s.queue;
    const int B = s.cfg.subfiles_per_file;
    // Key compared lexicographically, larger wins, first maximum kept.
    using Key = std::tuple<int, double, int>;
    auto key_of = [&](const Pair& p) -> Key {
        int inter = cache_count(q[p.i].side_info & q[p.j].side_info);
        int neg_min_d = -std::min(q[p.i].deadline, q[p.j].deadline);
        switch (v) {
        case SacmVariant::Sacm:
        case SacmVariant::SacmPlus:
            return {inter, 0.0, 0};
        case SacmVariant::SacmPlusPlus:
            return {inter, 0.0, neg_min_d};
        case SacmVariant::SacmPlusPlusPop:
            return {inter, pop_mass(union_of(q[p.i].packets, q[p.j].packets), *s.demand, B), neg_min_d};
        }
        return {inter, 0.0, 0};
    };

    int best = 0;
    Key best_key = key_of(s.merge_set[0]);
    for (int m = 1; m < s.n_merges(); ++m) {
        Key k = key_of(s.merge_set[m]);
        if (k > best_key) {
            best_key = k;
            best = m;
        }
    }

    const Pair p = s.merge_set[best];
    int keep = 0;
    if (v != SacmVariant::Sacm) {
        const auto deg = merge_degrees(s);
        if (v == SacmVariant::SacmPlusPlusPop) {
            double wi = deg[p.i] + 2.0 * pop_mass(q[p.i].packets, *s.demand, B);
            double wj = deg[p.j] + 2.0 * pop_mass(q[p.j].packets, *s.demand, B);
            keep = wi >= wj ? 0 : 1;
        } else {
            keep = deg[p.j] > deg[p.i] ? 1 : 0;
        }
    }
    return encode_action(best, keep);
}

int misfit(const QueueRecord& ri, const QueueRecord& rj)
{
    const CacheSet cover_i = rj.side_info | (CacheSet{1} << rj.dest);
    const CacheSet cover_j = ri.side_info | (CacheSet{1} << ri.dest);
    return cache_count(ri.side_info & ~cover_i) + cache_count(rj.side_info & ~cover_j);
}

int pair_index_of(const SimState& s, int i, int j)
{
    if (i > j)
        std::swap(i, j);
    for (int m = 0; m < s.n_merges(); ++m)
        if (s.merge_set[m].i == i && s.merge_set[m].j == j)
            return m;
    return -1;
}

int tau_fit(const SimState& s, int tau)
{
    const auto& q = s.queue;
    std::vector<int> order(q.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a].deadline < q[b].deadline; });

    const int anchor = order[0];
    for (std::size_t n = 1; n < order.size(); ++n) {
        const int cand = order[n];
        if (!xor_feasible(q[anchor], q[cand]) || misfit(q[anchor], q[cand]) > tau)
            continue;
        const int m = pair_index_of(s, anchor, cand);
        if (m < 0)
            throw ContractViolation("tau_fit: feasible pair missing from the merge set");
        const auto deg = merge_degrees(s);
        const int kept = deg[anchor] > deg[cand] ? anchor : cand;
        return encode_action(m, kept == s.merge_set[m].i ? 0 : 1);
    }
    return s.cfg.unicast_action();
}

int ExternalPolicy::act(const SimState& s) const
{
    int a = cb_(encode(s, track_));
    if (!action_valid(s, a))
        throw PolicyFault(fmt::format("policy '{}' chose masked-invalid action {} at step {}", name_, a, s.step));
    return a;
}

namespace {

class FnPolicy : public Policy {
public:
    FnPolicy(std::string name, std::function<int(const SimState&)> fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    int act(const SimState& s) const override { return fn_(s); }
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::function<int(const SimState&)> fn_;
};

PolicyPtr tau_policy(const std::string& name, int tau)
{
    return std::make_shared<FnPolicy>(name, [tau](const SimState& s) { return tau_fit(s, tau); });
}

PolicyPtr sacm_policy(const std::string& name, SacmVariant v)
{
    return std::make_shared<FnPolicy>(name, [v](const SimState& s) { return sacm_family(s, v); });
}

} // namespace

PolicyPtr make_policy(const std::string& name)
{
    if (name == "ed-unicast")
        return std::make_shared<FnPolicy>(name, ed_unicast);
    if (name == "gcm")
        return std::make_shared<FnPolicy>(name, gcm);
    if (name == "sacm")
        return sacm_policy(name, SacmVariant::Sacm);
    if (name == "sacm+")
        return sacm_policy(name, SacmVariant::SacmPlus);
    if (name == "sacm++")
        return sacm_policy(name, SacmVariant::SacmPlusPlus);
    if (name == "sacm++pop")
        return sacm_policy(name, SacmVariant::SacmPlusPlusPop);
    if (name == "perfect-fit")
        return tau_policy(name, 0);
    if (name == "first-fit")
        return tau_policy(name, 3);
    if (name.rfind("taufit:", 0) == 0) {
        const std::string arg = name.substr(7);
        int tau = -1;
        auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), tau);
        if (ec != std::errc() || p != arg.data() + arg.size() || tau < 0)
            throw ConfigError(fmt::format("policy '{}': tau must be a nonnegative integer", name));
        return tau_policy(name, tau);
    }
    if (name == "external")
        throw ConfigError("policy 'external' has no built-in implementation; supply a callback");
    throw ConfigError(fmt::format("unknown policy '{}'", name));
}

std::vector<std::string> builtin_policy_names()
{
    return {"ed-unicast", "gcm", "sacm", "sacm+", "sacm++", "sacm++pop",
            "taufit:0", "taufit:1", "taufit:2", "taufit:3", "perfect-fit", "first-fit"};
}

} // namespace xorsim
