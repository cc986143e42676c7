#pragma once

#include "xorsim/observation.hpp"
#include "xorsim/policy.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace xorsim {

struct PlannerConfig {
    int top_k = 16;
    int depth = 4;
    int mc_seeds = 4;
    double discount = 0.995;
    PolicyPtr continuation; // null means SACM++
    std::function<double(const SimState&)> value_fn;

    static PlannerConfig behavior_cloning() { return {}; }
    static PlannerConfig expert_iteration()
    {
        PlannerConfig c;
        c.top_k = 12;
        c.depth = 5;
        c.mc_seeds = 3;
        return c;
    }

    void validate() const;
};

// Merge-set indices sorted by (|S_i & S_j|, -min d, deg_i + deg_j) descending,
// then by enumeration position ascending; first top_k kept.
std::vector<int> rank_pairs(const SimState& s, int top_k);

// Both keep bits of every retained pair in (i, j, keep) order, then unicast.
std::vector<int> build_candidates(const SimState& s, const PlannerConfig& cfg);

// Seed of Monte-Carlo replicate m: mix_seed(episode_seed, step, m).
std::uint64_t rollout_seed(const SimState& s, int m);

// Clone reseeded for replicate m, as used by score_candidate.
SimState rollout_clone(const SimState& s, int m);

// Mean over replicates of the discounted total reward of `action` followed by
// `depth` continuation steps, plus discount^depth * value_fn at the end when the
// horizon did not cut the rollout short.
double score_candidate(const SimState& s, int action, const PlannerConfig& cfg);

struct TeacherDecision {
    int action = 0;
    std::vector<int> candidates;
    std::vector<double> scores;
};

// Argmax over candidates; the first maximum in candidate order wins.
TeacherDecision teacher_decide(const SimState& s, const PlannerConfig& cfg);
inline int teacher_label(const SimState& s, const PlannerConfig& cfg) { return teacher_decide(s, cfg).action; }

class TeacherPolicy : public Policy {
public:
    explicit TeacherPolicy(PlannerConfig cfg) : cfg_(std::move(cfg)) {}
    int act(const SimState& s) const override { return teacher_label(s, cfg_); }
    std::string name() const override { return "teacher"; }

private:
    PlannerConfig cfg_;
};

struct DatasetOptions {
    Track track = Track::A;
    std::uint64_t seed = 7;
    // Roll-in mixing: with probability p_expert the teacher's label drives the
    // trajectory, otherwise roll_in does. Without mixing the teacher drives.
    bool mixing = false;
    double p_expert = 0.20;
    PolicyPtr roll_in; // null means SACM++
};

// Writes n_samples lines "obs v0 v1 ... | mask b0 b1 ... | label a". Episode
// i uses seed mix_seed(opts.seed, i). Returns the number of records written.
long emit_bc_dataset(long n_samples, const SystemConfig& sys, const PlannerConfig& cfg, const DatasetOptions& opts,
                     std::ostream& out);

struct DatasetRecord {
    std::vector<double> obs;
    std::vector<int> mask;
    int label = 0;
};

// Parses one dataset line; throws SimulationError when malformed.
DatasetRecord parse_dataset_line(const std::string& line);

} // namespace xorsim
