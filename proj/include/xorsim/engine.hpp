#pragma once

#include "xorsim/core.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace xorsim {

struct Pair {
    int i = 0;
    int j = 0;
    bool operator==(const Pair&) const = default;
};

using ActionMask = std::vector<std::uint8_t>;

// Deliberately broken engine variants, used by the audit to show that its checks bite.
enum class Mutant {
    None,
    RefillAfterDecrement, // Phase-1 refill moved after the deadline decrement
    UnionSideInfo,        // S_mg computed as S_i | S_j
};

enum class RequestStatus : std::uint8_t { Pending = 0, Completed = 1, Missed = 2 };

struct RewardWeights {
    double served = 1.0;
    double expired = 1.0;
    double intersection = 0.75;
    double size_penalty = 0.15;
    double shape = 0.20;
    double shape_gamma = 0.995;
};

inline constexpr RewardWeights kReward{};

struct SimState {
    SystemConfig cfg;
    std::shared_ptr<const Demand> demand;           // immutable, shared by clones
    std::shared_ptr<const CacheAssignment> caches;  // immutable for the episode
    std::vector<QueueRecord> queue;                 // Q slots, always full
    int step = 0;
    Rng rng;
    Rng erasure_rng;
    bool erasure_channel = false; // draw erasure coin on coded actions
    std::vector<Pair> merge_set;
    std::uint64_t next_request_id = 0;
    std::uint64_t episode_seed = 0;
    std::vector<std::uint8_t> served_files;          // F_served, indexed by file
    std::vector<RequestStatus> request_status;       // ledgers D_t / L_t by request ID
    Mutant mutant = Mutant::None;

    bool done() const { return step >= cfg.horizon; }
    int n_merges() const { return static_cast<int>(merge_set.size()); }

    // Field-by-field, placement compared by value.
    bool same_as(const SimState& other) const;
};

// Placement (caches 0..K-1), then the initial queue (slots 0..Q-1), all from one
// stream seeded with episode_seed. The erasure stream is seeded separately with
// mix_seed(episode_seed, kErasureStreamTag) so that enabling erasures never shifts
// the main stream.
inline constexpr std::uint64_t kErasureStreamTag = 0xE4A5E5ULL;
SimState reset(const SystemConfig& cfg, std::uint64_t episode_seed);

inline SimState clone_env(const SimState& s) { return s; }

bool xor_feasible(const QueueRecord& a, const QueueRecord& b);
std::vector<Pair> enumerate_merges(const std::vector<QueueRecord>& queue);
ActionMask action_mask(const SimState& s);
ActionMask action_mask(int n_merges, const SystemConfig& cfg);
bool action_valid(const SimState& s, int action);

// Number of distinct feasible partners of each slot in the current merge set.
std::vector<int> merge_degrees(const SimState& s);

// Slot with minimum (deadline, slot index).
int edf_slot(const std::vector<QueueRecord>& queue);

struct DecodedAction {
    bool unicast = true;
    int pair_index = -1;
    int keep_bit = 0;
};

// a = 2 P_max, or a pair index outside the current merge set, decodes to unicast.
DecodedAction decode_action(int action, int n_merges, const SystemConfig& cfg);
inline int encode_action(int pair_index, int keep_bit) { return 2 * pair_index + keep_bit; }

struct MergeResult {
    QueueRecord merged;
    int kept_slot = 0;
    int freed_slot = 0;
};

// Draws k_mg with one below(2) call: 0 picks k_i, 1 picks k_j. keep_bit 0 keeps
// slot i. Throws ContractViolation on an infeasible pair.
MergeResult merge_records(const QueueRecord& ri, const QueueRecord& rj, int slot_i, int slot_j,
                          int keep_bit, Rng& rng, Mutant mutant = Mutant::None);

enum class StepKind { CodedMerge, Unicast, ErasedMerge };
const char* to_string(StepKind kind);

struct RewardComponents {
    double base = 0.0;
    double quality = 0.0;
    double shape = 0.0;
    double total = 0.0;
};

struct StepOutcome {
    int step = 0; // index of this decision step, 0-based
    int action = 0;
    StepKind kind = StepKind::Unicast;

    // Coded and erased merges.
    int pair_index = -1;
    Pair pair;
    int keep_bit = 0;
    int dest_i = -1;
    int dest_j = -1;
    int intersection = 0; // |S_i & S_j|
    QueueRecord merged;

    // Unicast.
    int served_slot = -1;
    int served_dest = -1;

    std::vector<int> tx_packets; // f_tx, empty for an erased merge
    int u = 0;
    int e = 0;
    std::vector<QueueRecord> expired;
    std::vector<int> expired_slots;
    RewardComponents reward;
    std::vector<std::uint64_t> completed; // C_t
    std::vector<std::uint64_t> missed;    // M_t
    int merges_before = 0;                // |M_t| at decision time
    int merges_after = 0;                 // |M_{t+1}|

    // Phase-1 refill bookkeeping for the refill-timing audit.
    int phase1_slot = -1;
    std::uint64_t phase1_order = 0;
    bool phase1_expired = false;
    std::vector<int> phase3_slots;

    bool coded() const { return kind != StepKind::Unicast; }
};

double potential(int n_merges, const SystemConfig& cfg);
inline double potential(const SimState& s) { return potential(s.n_merges(), s.cfg); }
double shaping_reward(double phi_before, double phi_after, const RewardWeights& w = kReward);
double merge_quality(int side_info_size, int packet_count, const RewardWeights& w = kReward);

// One transition. Throws EpisodeFinished once step == H.
StepOutcome step(SimState& s, int action);

struct OneGapResult {
    bool ok = true;
    std::vector<int> gaps; // packets of f_r missing from C_{k_r}
};

OneGapResult check_one_gap(const QueueRecord& r, const CacheAssignment& caches);

} // namespace xorsim
