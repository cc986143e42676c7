#pragma once

#include "xorsim/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xorsim {

struct AuditCheck {
    std::string name;
    long trials = 0;
    long violations = 0;
    std::string witness; // first violation, human readable
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    // Same-step Phase-1 expiry frequency against 1/D.
    long phase1_refills = 0;
    long phase1_same_step = 0;
    double freq_lo = 0.0;
    double freq_hi = 0.0;

    bool ok() const;
    long total_violations() const;
    const AuditCheck& check(const std::string& name) const;
    std::string render() const;
};

struct AuditOptions {
    SystemConfig cfg;
    long n_steps = 100000; // decision steps simulated
    std::uint64_t seed = 1;
    Mutant mutant = Mutant::None;
    double coded_bias = 0.85; // chance of a random coded action when one is valid
};

// Drives random mask-valid actions through fresh episodes and checks, on every
// step: one-gap on every queue record, merge set and mask against a brute-force
// subset check, shrinking side information and k_mg on merges, refill deadline
// domains, reward additivity, and per episode the request-ID partition and
// metric identities. Finally tests the same-step Phase-1 expiry rate against 1/D
// with a 99% binomial interval.
AuditReport run_audit(const AuditOptions& opts);

// Subset test against the placement itself, independent of side-info bitmasks.
bool feasible_bruteforce(const QueueRecord& a, const QueueRecord& b, const CacheAssignment& caches);

} // namespace xorsim
