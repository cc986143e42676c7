#pragma once

#include "xorsim/engine.hpp"
#include "xorsim/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xorsim {

// JSON Lines, one object per line, keys in this fixed order.
//
// {"type":"begin","seed":S,"horizon":H}
// {"type":"step","t","action","kind","pair_i","pair_j","keep","slot","u","e",
//  "n_expired","base","quality","shape","total","merges","merges_next",
//  "n_completed","n_missed"}
//   verbose adds "tx","expired_slots","completed","missed"
//   pair_i/pair_j/keep are -1 on unicast steps, slot is -1 on coded steps
// {"type":"episode", followed by every EpisodeSummary metric name (null when
//  absent), then "served_by_cache","expired_by_cache"}
std::string trace_begin_line(std::uint64_t seed, int horizon);
std::string trace_step_line(const StepOutcome& o, bool verbose = false);
std::string trace_episode_line(const EpisodeSummary& m, const EpisodeMetrics& acc);

// Per-episode sums recovered from a trace without re-simulation.
struct TraceEpisode {
    std::uint64_t seed = 0;
    int horizon = 0;
    int steps = 0;
    double sum_u = 0.0;
    double sum_e = 0.0;
    double sum_completed = 0.0;
    double sum_missed = 0.0;
    double reward_sum = 0.0;
};

// Throws SimulationError on a malformed line.
std::vector<TraceEpisode> read_trace(std::istream& in);

} // namespace xorsim
