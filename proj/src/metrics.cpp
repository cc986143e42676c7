#include "xorsim/metrics.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace xorsim {

const std::vector<std::string>& EpisodeSummary::metric_names()
{
    static const std::vector<std::string> names = {
        "rho",       "delta",      "rho_uniq", "sigma",    "mu",          "g",
        "epsilon",   "eta_req",    "m_req",    "sigma_req", "merge_rate", "opp_rate",
        "reward_per_step", "sum_u", "sum_e",   "sum_u_uniq", "sum_e_uniq", "sum_completed",
        "sum_missed", "delta_packet"};
    return names;
}

std::optional<double> EpisodeSummary::get(const std::string& n) const
{
    if (n == "rho") return rho;
    if (n == "delta") return delta;
    if (n == "rho_uniq") return rho_uniq;
    if (n == "sigma") return sigma;
    if (n == "mu") return mu;
    if (n == "g") return g;
    if (n == "epsilon") return epsilon;
    if (n == "eta_req") return eta_req;
    if (n == "m_req") return m_req;
    if (n == "sigma_req") return sigma_req;
    if (n == "merge_rate") return merge_rate;
    if (n == "opp_rate") return opp_rate;
    if (n == "reward_per_step") return reward_per_step;
    if (n == "sum_u") return sum_u;
    if (n == "sum_e") return sum_e;
    if (n == "sum_u_uniq") return sum_u_uniq;
    if (n == "sum_e_uniq") return sum_e_uniq;
    if (n == "sum_completed") return sum_completed;
    if (n == "sum_missed") return sum_missed;
    if (n == "delta_packet") return delta_packet;
    throw ConfigError(fmt::format("unknown metric '{}'", n));
}

bool sigma_recovers(double sigma, int horizon, double u_minus_e)
{
    const double back = sigma * horizon;
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(u_minus_e));
    return std::nearbyint(back) == u_minus_e && std::fabs(back - u_minus_e) <= tol;
}

EpisodeMetrics::EpisodeMetrics(const SystemConfig& cfg)
    : H_(cfg.horizon), B_(cfg.subfiles_per_file), K_(cfg.n_caches), served_files_(cfg.n_files, 0),
      served_packets_(cfg.n_packets(), 0),
      served_k_(cfg.n_caches, 0.0), expired_k_(cfg.n_caches, 0.0)
{
}

void EpisodeMetrics::accumulate(const StepOutcome& o)
{
    if (o.step != steps_)
        throw ContractViolation(fmt::format("metrics: expected step {}, got {}", steps_, o.step));
    ++steps_;

    sum_u_ += o.u;
    sum_e_ += o.e;
    epsilon_ += static_cast<double>(o.expired.size());
    sum_completed_ += static_cast<double>(o.completed.size());
    sum_missed_ += static_cast<double>(o.missed.size());
    reward_sum_ += o.reward.total;

    const bool opportunity = o.merges_before > 0;
    if (opportunity)
        ++opp_steps_;
    if (o.coded()) {
        ++coded_steps_;
        coded_u_ += o.u;
        if (opportunity)
            ++coded_opp_steps_;
        if (K_ > 2)
            intersections_.push_back(static_cast<double>(o.intersection) / (K_ - 2));
    }

    for (int p : o.tx_packets) {
        if (!served_packets_[p]) {
            served_packets_[p] = 1;
            sum_u_pkt_ += 1;
        }
        int f = p / B_;
        if (!served_files_[f]) {
            served_files_[f] = 1;
            sum_u_uniq_ += 1;
        }
    }

    std::vector<int> packets;
    for (const auto& r : o.expired)
        packets.insert(packets.end(), r.packets.begin(), r.packets.end());
    std::sort(packets.begin(), packets.end());
    packets.erase(std::unique(packets.begin(), packets.end()), packets.end());
    std::vector<int> files;
    for (int p : packets)
        files.push_back(p / B_);
    files.erase(std::unique(files.begin(), files.end()), files.end());
    expired_files_log_.push_back(std::move(files));
    expired_packets_log_.push_back(std::move(packets));

    // Per-cache attribution: a unicast credits its destination one packet, a
    // merge credits both endpoint destinations the whole broadcast, an
    // expiration debits the record's destination its packet mass.
    if (o.kind == StepKind::Unicast) {
        served_k_[o.served_dest] += o.u;
    } else if (o.kind == StepKind::CodedMerge) {
        served_k_[o.dest_i] += o.u;
        served_k_[o.dest_j] += o.u;
        if (static_cast<int>(size_hist_.size()) <= o.u)
            size_hist_.resize(o.u + 1, 0);
        ++size_hist_[o.u];
    }
    for (const auto& r : o.expired)
        expired_k_[r.dest] += static_cast<double>(r.packets.size());
}

EpisodeSummary EpisodeMetrics::finalize(double lambda, double lambda_req) const
{
    if (steps_ != H_)
        throw ContractViolation(fmt::format("metrics: finalize after {} of {} steps", steps_, H_));
    EpisodeSummary m;
    const double H = H_;
    m.horizon = H_;
    m.sum_u = sum_u_;
    m.sum_e = sum_e_;
    m.sum_u_uniq = sum_u_uniq_;
    m.sum_completed = sum_completed_;
    m.sum_missed = sum_missed_;
    m.reward_sum = reward_sum_;

    // Expired identities count only if never served by the end of the episode.
    double e_uniq = 0.0;
    for (const auto& files : expired_files_log_)
        for (int f : files)
            if (!served_files_[f])
                e_uniq += 1;
    m.sum_e_uniq = e_uniq;

    double e_pkt = 0.0;
    for (const auto& packets : expired_packets_log_)
        for (int p : packets)
            if (!served_packets_[p])
                e_pkt += 1;
    m.delta_packet = (sum_u_pkt_ + e_pkt) > 0 ? sum_u_pkt_ / (sum_u_pkt_ + e_pkt) : 0.0;

    m.rho = (sum_u_ + sum_e_) > 0 ? sum_e_ / (sum_u_ + sum_e_) : 0.0;
    m.delta = (sum_u_uniq_ + e_uniq) > 0 ? sum_u_uniq_ / (sum_u_uniq_ + e_uniq) : 0.0;
    m.rho_uniq = 1.0 - m.delta;
    m.sigma = (sum_u_ - lambda * sum_e_) / H;
    m.mu = sum_u_ / H;
    if (coded_steps_ > 0)
        m.g = coded_u_ / coded_steps_;
    m.epsilon = epsilon_;
    m.eta_req = sum_completed_ / H;
    m.m_req = sum_missed_ / H;
    m.sigma_req = (sum_completed_ - lambda_req * sum_missed_) / H;
    if (opp_steps_ > 0)
        m.merge_rate = static_cast<double>(coded_opp_steps_) / opp_steps_;
    m.opp_rate = opp_steps_ / H;
    m.reward_per_step = reward_sum_ / H;
    return m;
}

} // namespace xorsim
