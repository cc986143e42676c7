#include "xorsim/planner.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace xorsim {

void PlannerConfig::validate() const
{
    if (top_k < 1)
        throw ConfigError("planner: top_k must be at least 1");
    if (depth < 0)
        throw ConfigError("planner: depth must be nonnegative");
    if (mc_seeds < 1)
        throw ConfigError("planner: mc_seeds must be at least 1");
    if (!(discount > 0.0 && discount <= 1.0))
        throw ConfigError("planner: discount must lie in (0, 1]");
}

std::vector<int> rank_pairs(const SimState& s, int top_k)
{
    const auto deg = merge_degrees(s);
    const auto& q = s.queue;
    using Key = std::tuple<int, int, int, int>;
    std::vector<std::pair<Key, int>> keyed;
    for (int m = 0; m < s.n_merges(); ++m) {
        const auto [i, j] = s.merge_set[m];
        keyed.push_back({Key{cache_count(q[i].side_info & q[j].side_info), -std::min(q[i].deadline, q[j].deadline),
                             deg[i] + deg[j], -m},
                         m});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(keyed.size()) && k < top_k; ++k)
        out.push_back(keyed[k].second);
    return out;
}

std::vector<int> build_candidates(const SimState& s, const PlannerConfig& cfg)
{
    std::vector<int> pairs = rank_pairs(s, cfg.top_k);
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> out;
    for (int m : pairs)
        for (int keep = 0; keep < 2; ++keep)
            if (action_valid(s, encode_action(m, keep)))
                out.push_back(encode_action(m, keep));
    out.push_back(s.cfg.unicast_action());
    return out;
}

std::uint64_t rollout_seed(const SimState& s, int m)
{
    return mix_seed(s.episode_seed, static_cast<std::uint64_t>(s.step), static_cast<std::uint64_t>(m));
}

SimState rollout_clone(const SimState& s, int m)
{
    SimState c = clone_env(s);
    const std::uint64_t seed = rollout_seed(s, m);
    c.rng = Rng(seed);
    c.erasure_rng = Rng(mix_seed(seed, kErasureStreamTag));
    return c;
}

double score_candidate(const SimState& s, int action, const PlannerConfig& cfg)
{
    const PolicyPtr cont = cfg.continuation ? cfg.continuation : make_policy("sacm++");
    double total = 0.0;
    for (int m = 0; m < cfg.mc_seeds; ++m) {
        SimState c = rollout_clone(s, m);
        double g = step(c, action).reward.total;
        double w = 1.0;
        bool truncated = false;
        for (int d = 0; d < cfg.depth; ++d) {
            if (c.done()) {
                truncated = true;
                break;
            }
            w *= cfg.discount;
            g += w * step(c, cont->act(c)).reward.total;
        }
        if (cfg.value_fn && !truncated && !c.done())
            g += std::pow(cfg.discount, cfg.depth) * cfg.value_fn(c);
        total += g;
    }
    return total / cfg.mc_seeds;
}

TeacherDecision teacher_decide(const SimState& s, const PlannerConfig& cfg)
{
    cfg.validate();
    if (s.done())
        throw EpisodeFinished("teacher: episode already reached its horizon");
    TeacherDecision d;
    d.candidates = build_candidates(s, cfg);
    std::size_t best = 0;
    for (std::size_t c = 0; c < d.candidates.size(); ++c) {
        d.scores.push_back(score_candidate(s, d.candidates[c], cfg));
        if (d.scores[c] > d.scores[best])
            best = c;
    }
    d.action = d.candidates[best];
    return d;
}

long emit_bc_dataset(long n_samples, const SystemConfig& sys, const PlannerConfig& cfg, const DatasetOptions& opts,
                     std::ostream& out)
{
    cfg.validate();
    const PolicyPtr roll_in = opts.roll_in ? opts.roll_in : make_policy("sacm++");
    Rng mix_rng(mix_seed(opts.seed, 0xB1E4DULL));
    long written = 0;
    for (std::uint64_t ep = 0; written < n_samples; ++ep) {
        SimState s = reset(sys, mix_seed(opts.seed, ep));
        while (!s.done() && written < n_samples) {
            const int label = teacher_label(s, cfg);
            const Observation obs = encode(s, opts.track);
            std::string line = "obs";
            for (double v : obs.flat())
                line += fmt::format(" {}", v);
            line += " | mask";
            for (auto b : obs.mask)
                line += b ? " 1" : " 0";
            line += fmt::format(" | label {}\n", label);
            out << line;
            if (!out)
                throw SimulationError("dataset: write failed");
            ++written;
            int a = label;
            if (opts.mixing && !(mix_rng.uniform01() < opts.p_expert)) {
                a = roll_in->act(s);
                if (!action_valid(s, a))
                    throw PolicyFault(fmt::format("roll-in policy chose masked-invalid action {}", a));
            }
            step(s, a);
        }
    }
    return written;
}

DatasetRecord parse_dataset_line(const std::string& line)
{
    DatasetRecord r;
    std::istringstream in(line);
    std::string tok;
    if (!(in >> tok) || tok != "obs")
        throw SimulationError("dataset: line must start with 'obs'");
    while (in >> tok && tok != "|")
        r.obs.push_back(std::stod(tok));
    if (!(in >> tok) || tok != "mask")
        throw SimulationError("dataset: missing mask section");
    while (in >> tok && tok != "|")
        r.mask.push_back(std::stoi(tok));
    if (!(in >> tok) || tok != "label" || !(in >> r.label))
        throw SimulationError("dataset: missing label");
    return r;
}

} // namespace xorsim
