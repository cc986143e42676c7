#pragma once

#include "xorsim/metrics.hpp"
#include "xorsim/policy.hpp"
#include "xorsim/trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xorsim {

struct Regime {
    std::string name;
    SystemConfig cfg;
};

// ID-default, file60/120/150, pcache0.20/0.40, delay10/30, and the demand
// battery zipf0.6/0.8/1.0/1.2 plus mandelbrot.
std::vector<Regime> standard_regimes();
Regime find_regime(const std::string& name, const SystemConfig& base = {});

std::vector<int> validation_seeds(); // 0..49
std::vector<int> holdout_seeds();    // 50..99

struct EpisodeResult {
    std::string regime;
    std::string policy;
    int seed = 0;
    int episode = 0;
    EpisodeSummary summary;
    std::vector<double> served_by_cache;
    std::vector<double> expired_by_cache;
    std::vector<double> merge_intersections;
};

struct EvalPlan {
    std::vector<Regime> regimes;
    std::vector<PolicyPtr> policies;
    std::vector<int> seeds;
    int episodes_per_seed = 200;
    int bootstrap_resamples = 10000;
    std::uint64_t report_seed = 20240601;
    int workers = 1;
    double lambda = 1.0;
    double lambda_req = 1.0;
};

// One episode from a given initial state. Throws PolicyFault on a masked-invalid
// action. trace_out, if given, receives the step lines and the closing episode
// line; the caller writes the begin line.
EpisodeResult run_episode(SimState state, const Policy& policy, double lambda = 1.0, double lambda_req = 1.0,
                          std::vector<std::string>* trace_out = nullptr, bool verbose = false);

// Results ordered by (regime, seed, episode, policy) regardless of worker count.
// Every policy of a (regime, seed, episode) cell starts from a clone of the same
// initial state.
std::vector<EpisodeResult> run_plan(const EvalPlan& plan);

// Mean over episodes of one seed, per seed in plan order. Episodes where the
// metric is absent are skipped; a seed with none is reported as absent.
std::vector<std::optional<double>> per_seed_means(const std::vector<EpisodeResult>& results,
                                                  const std::string& regime, const std::string& policy,
                                                  const std::string& metric, const std::vector<int>& seeds);

struct MeanCI {
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Normal approximation: mean +- 1.96 sd / sqrt(n). Absent values are dropped.
MeanCI normal_ci(const std::vector<std::optional<double>>& values);

struct BootstrapCI {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Linear-interpolation percentile (the "type 7" rule) of sorted values, q in [0,1].
double percentile_sorted(const std::vector<double>& sorted, double q);

// Percentile bootstrap of the mean: 2.5 / 97.5 percentiles of `resamples`
// resampled means. Throws ConfigError with fewer than two values.
BootstrapCI paired_bootstrap(const std::vector<double>& diffs, int resamples, std::uint64_t seed);

struct LambdaRow {
    std::string policy;
    double lambda = 0.0;
    double sigma = 0.0;     // mean over episodes of (U - lambda E) / H
    double sigma_req = 0.0; // mean over episodes of (C - lambda M) / H
};

// Sweep from per-episode trace sums; no simulation involved.
std::vector<LambdaRow> lambda_sweep(const std::map<std::string, std::vector<TraceEpisode>>& traces,
                                    const std::vector<double>& lambdas);

// Root of (a0 - a1 x) - (b0 - b1 x), i.e. the lambda where two affine scores
// cross. Absent when the slopes are equal.
std::optional<double> crossover_lambda(double a0, double a1, double b0, double b1);

// tau with the best validation mean; ties go to the smaller tau.
int oracle_tau(const std::map<int, double>& validation_means, bool higher_is_better);

struct FairnessReport {
    std::vector<double> rho_k;
    double max_min_ratio = 1.0;
};

// Pools per-cache served/expired masses over the given episodes.
FairnessReport fairness_report(const std::vector<EpisodeResult>& episodes);
FairnessReport fairness_from_masses(const std::vector<double>& served, const std::vector<double>& expired);

inline const std::vector<double>& erasure_grid()
{
    static const std::vector<double> g = {0.0, 0.05, 0.10, 0.20};
    return g;
}

struct ReportRow {
    std::string regime;
    std::string policy;
    std::string metric;
    MeanCI ci;
};

struct PairedRow {
    std::string regime;
    std::string policy_a;
    std::string policy_b;
    std::string metric;
    BootstrapCI ci;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    std::vector<PairedRow> paired;
};

// Per-seed means first, then statistics across seeds. Paired rows compare every
// policy against `reference` when it is set and present.
EvalReport build_report(const EvalPlan& plan, const std::vector<EpisodeResult>& results,
                        const std::vector<std::string>& metrics, const std::string& reference = "");

// Tab-separated, one row per (regime, policy, metric), header line first.
std::string render_tsv(const EvalReport& r);
// Aligned text table per regime: policies as rows, metrics as columns, "mean +- half-width".
std::string render_text(const EvalReport& r);

} // namespace xorsim
