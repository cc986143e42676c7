#include "xorsim/trace.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <istream>

namespace xorsim {

using ojson = nlohmann::ordered_json;

std::string trace_begin_line(std::uint64_t seed, int horizon)
{
    ojson j;
    j["type"] = "begin";
    j["seed"] = seed;
    j["horizon"] = horizon;
    return j.dump();
}

std::string trace_step_line(const StepOutcome& o, bool verbose)
{
    const bool coded = o.kind != StepKind::Unicast;
    ojson j;
    j["type"] = "step";
    j["t"] = o.step;
    j["action"] = o.action;
    j["kind"] = to_string(o.kind);
    j["pair_i"] = coded ? o.pair.i : -1;
    j["pair_j"] = coded ? o.pair.j : -1;
    j["keep"] = coded ? o.keep_bit : -1;
    j["slot"] = coded ? -1 : o.served_slot;
    j["u"] = o.u;
    j["e"] = o.e;
    j["n_expired"] = o.expired.size();
    j["base"] = o.reward.base;
    j["quality"] = o.reward.quality;
    j["shape"] = o.reward.shape;
    j["total"] = o.reward.total;
    j["merges"] = o.merges_before;
    j["merges_next"] = o.merges_after;
    j["n_completed"] = o.completed.size();
    j["n_missed"] = o.missed.size();
    if (verbose) {
        j["tx"] = o.tx_packets;
        j["expired_slots"] = o.expired_slots;
        j["completed"] = o.completed;
        j["missed"] = o.missed;
    }
    return j.dump();
}

std::string trace_episode_line(const EpisodeSummary& m, const EpisodeMetrics& acc)
{
    ojson j;
    j["type"] = "episode";
    for (const auto& name : EpisodeSummary::metric_names()) {
        auto v = m.get(name);
        if (v)
            j[name] = *v;
        else
            j[name] = nullptr;
    }
    j["served_by_cache"] = acc.served_by_cache();
    j["expired_by_cache"] = acc.expired_by_cache();
    return j.dump();
}

std::vector<TraceEpisode> read_trace(std::istream& in)
{
    std::vector<TraceEpisode> out;
    std::string line;
    int lineno = 0;
    bool open = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        ojson j;
        try {
            j = ojson::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "begin") {
                TraceEpisode e;
                e.seed = j.at("seed").get<std::uint64_t>();
                e.horizon = j.at("horizon").get<int>();
                out.push_back(e);
                open = true;
            } else if (type == "step") {
                if (!open)
                    throw SimulationError("step record before any begin record");
                auto& e = out.back();
                ++e.steps;
                e.sum_u += j.at("u").get<double>();
                e.sum_e += j.at("e").get<double>();
                e.sum_completed += j.at("n_completed").get<double>();
                e.sum_missed += j.at("n_missed").get<double>();
                e.reward_sum += j.at("total").get<double>();
            } else if (type == "episode") {
                open = false;
            } else {
                throw SimulationError(fmt::format("unknown record type '{}'", type));
            }
        } catch (const nlohmann::json::exception& ex) {
            throw SimulationError(fmt::format("trace line {}: {}", lineno, ex.what()));
        } catch (const SimulationError& ex) {
            throw SimulationError(fmt::format("trace line {}: {}", lineno, ex.what()));
        }
    }
    return out;
}

} // namespace xorsim
