#pragma once

#include "xorsim/engine.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xorsim {

// Finalized per-episode metrics. g and merge_rate are absent when their
// denominators are zero.
struct EpisodeSummary {
    double rho = 0.0;            // expired / (served + expired) packet mass
    double delta = 0.0;          // distinct file-identity coverage
    double rho_uniq = 0.0;       // 1 - delta
    double sigma = 0.0;          // (sum U - lambda sum E) / H
    double mu = 0.0;             // served packets per transmission
    std::optional<double> g;     // mean U over coded steps
    double epsilon = 0.0;        // expired records
    double eta_req = 0.0;        // completed requests per step
    double m_req = 0.0;          // missed requests per step
    double sigma_req = 0.0;      // (completed - lambda_req missed) / H
    std::optional<double> merge_rate;
    double opp_rate = 0.0;
    double reward_per_step = 0.0;
    // Coverage with packets, not files, as identities. Diagnostic only.
    double delta_packet = 0.0;

    double sum_u = 0.0;
    double sum_e = 0.0;
    double sum_u_uniq = 0.0;
    double sum_e_uniq = 0.0;
    double sum_completed = 0.0;
    double sum_missed = 0.0;
    double reward_sum = 0.0;
    int horizon = 0;

    // Metric names accepted by get() and by the report layer.
    static const std::vector<std::string>& metric_names();
    std::optional<double> get(const std::string& name) const;
};

// sigma * H recovers the integer U - E: it rounds to it and sits within a few
// ulps of it. Division by H is not exactly invertible in binary floating point.
bool sigma_recovers(double sigma, int horizon, double u_minus_e);

class EpisodeMetrics {
public:
    explicit EpisodeMetrics(const SystemConfig& cfg);

    // Outcomes must arrive in step order starting at 0.
    void accumulate(const StepOutcome& o);
    EpisodeSummary finalize(double lambda = 1.0, double lambda_req = 1.0) const;

    int steps() const { return steps_; }
    const std::vector<double>& served_by_cache() const { return served_k_; }
    const std::vector<double>& expired_by_cache() const { return expired_k_; }
    const std::vector<double>& merge_intersections() const { return intersections_; }
    // Count of coded broadcasts by aggregate size |f_mg|, index = size.
    const std::vector<long>& size_histogram() const { return size_hist_; }

private:
    int H_;
    int B_;
    int K_;
    int steps_ = 0;
    double sum_u_ = 0, sum_e_ = 0, sum_u_uniq_ = 0, sum_completed_ = 0, sum_missed_ = 0;
    double epsilon_ = 0, reward_sum_ = 0, coded_u_ = 0;
    int coded_steps_ = 0, opp_steps_ = 0, coded_opp_steps_ = 0;
    std::vector<std::uint8_t> served_files_;
    std::vector<std::vector<int>> expired_files_log_; // file identities expired per step
    std::vector<std::uint8_t> served_packets_;
    std::vector<std::vector<int>> expired_packets_log_;
    double sum_u_pkt_ = 0;
    std::vector<double> served_k_, expired_k_;
    std::vector<double> intersections_;
    std::vector<long> size_hist_;
};

} // namespace xorsim
