#include "xorsim/eval.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace xorsim {

std::vector<Regime> standard_regimes()
{
    std::vector<Regime> out;
    auto add = [&](std::string name, auto edit) {
        SystemConfig c;
        edit(c);
        out.push_back({std::move(name), c});
    };
    auto none = [](SystemConfig&) {};
    auto zipf = [](SystemConfig& c) { c.demand_law = DemandLaw::zipf(0.8); };

    add("id-default", none);
    add("file60", [](SystemConfig& c) { c.n_files = 60; });
    add("file120", [](SystemConfig& c) { c.n_files = 120; });
    add("file150", [](SystemConfig& c) { c.n_files = 150; });
    add("pcache0.20", [](SystemConfig& c) { c.cache_fraction = 0.20; });
    add("pcache0.40", [](SystemConfig& c) { c.cache_fraction = 0.40; });
    add("delay10", [](SystemConfig& c) { c.max_deadline = 10; });
    add("delay30", [](SystemConfig& c) { c.max_deadline = 30; });

    add("zipf-id", zipf);
    add("alpha0.6", [](SystemConfig& c) { c.demand_law = DemandLaw::zipf(0.6); });
    add("alpha1.0", [](SystemConfig& c) { c.demand_law = DemandLaw::zipf(1.0); });
    add("alpha1.2", [](SystemConfig& c) { c.demand_law = DemandLaw::zipf(1.2); });
    add("mandelbrot", [](SystemConfig& c) { c.demand_law = DemandLaw::mandelbrot_zipf(); });
    add("file60-z", [&](SystemConfig& c) { zipf(c); c.n_files = 60; });
    add("file120-z", [&](SystemConfig& c) { zipf(c); c.n_files = 120; });
    add("file150-z", [&](SystemConfig& c) { zipf(c); c.n_files = 150; });
    add("pcache0.20-z", [&](SystemConfig& c) { zipf(c); c.cache_fraction = 0.20; });
    add("pcache0.40-z", [&](SystemConfig& c) { zipf(c); c.cache_fraction = 0.40; });
    add("delay10-z", [&](SystemConfig& c) { zipf(c); c.max_deadline = 10; });
    add("delay30-z", [&](SystemConfig& c) { zipf(c); c.max_deadline = 30; });
    return out;
}

Regime find_regime(const std::string& name, const SystemConfig& base)
{
    for (auto& r : standard_regimes()) {
        if (r.name != name)
            continue;
        // Apply the regime's edits on top of base: take base and copy over the
        // fields in which the regime differs from the default config.
        const SystemConfig def;
        SystemConfig c = base;
        if (r.cfg.n_files != def.n_files) c.n_files = r.cfg.n_files;
        if (r.cfg.cache_fraction != def.cache_fraction) c.cache_fraction = r.cfg.cache_fraction;
        if (r.cfg.max_deadline != def.max_deadline) c.max_deadline = r.cfg.max_deadline;
        if (!(r.cfg.demand_law == def.demand_law)) c.demand_law = r.cfg.demand_law;
        c.validate();
        return {r.name, c};
    }
    throw ConfigError(fmt::format("unknown regime '{}'", name));
}

std::vector<int> validation_seeds()
{
    std::vector<int> s(50);
    std::iota(s.begin(), s.end(), 0);
    return s;
}

std::vector<int> holdout_seeds()
{
    std::vector<int> s(50);
    std::iota(s.begin(), s.end(), 50);
    return s;
}

EpisodeResult run_episode(SimState state, const Policy& policy, double lambda, double lambda_req,
                          std::vector<std::string>* trace_out, bool verbose)
{
    EpisodeMetrics acc(state.cfg);
    while (!state.done()) {
        const int a = policy.act(state);
        if (!action_valid(state, a))
            throw PolicyFault(
                fmt::format("policy '{}' chose masked-invalid action {} at step {}", policy.name(), a, state.step));
        StepOutcome o = step(state, a);
        acc.accumulate(o);
        if (trace_out)
            trace_out->push_back(trace_step_line(o, verbose));
    }
    EpisodeResult r;
    r.policy = policy.name();
    r.summary = acc.finalize(lambda, lambda_req);
    r.served_by_cache = acc.served_by_cache();
    r.expired_by_cache = acc.expired_by_cache();
    r.merge_intersections = acc.merge_intersections();
    if (trace_out)
        trace_out->push_back(trace_episode_line(r.summary, acc));
    return r;
}

std::vector<EpisodeResult> run_plan(const EvalPlan& plan)
{
    struct Cell {
        const Regime* regime;
        int seed;
        int episode;
    };
    std::vector<Cell> cells;
    for (const auto& r : plan.regimes)
        for (int s : plan.seeds)
            for (int e = 0; e < plan.episodes_per_seed; ++e)
                cells.push_back({&r, s, e});

    const std::size_t P = plan.policies.size();
    std::vector<EpisodeResult> out(cells.size() * P);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size() || failed.load())
                return;
            try {
                const Cell& cell = cells[c];
                const SimState init = reset(cell.regime->cfg, episode_seed(cell.seed, cell.episode));
                for (std::size_t p = 0; p < P; ++p) {
                    EpisodeResult r = run_episode(clone_env(init), *plan.policies[p], plan.lambda, plan.lambda_req);
                    r.regime = cell.regime->name;
                    r.seed = cell.seed;
                    r.episode = cell.episode;
                    out[c * P + p] = std::move(r);
                }
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
                return;
            }
        }
    };

    const int n = std::max(1, plan.workers);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

std::vector<std::optional<double>> per_seed_means(const std::vector<EpisodeResult>& results,
                                                  const std::string& regime, const std::string& policy,
                                                  const std::string& metric, const std::vector<int>& seeds)
{
    std::vector<std::optional<double>> out;
    for (int s : seeds) {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : results) {
            if (r.seed != s || r.policy != policy || r.regime != regime)
                continue;
            if (auto v = r.summary.get(metric)) {
                sum += *v;
                ++n;
            }
        }
        out.push_back(n > 0 ? std::optional<double>(sum / n) : std::nullopt);
    }
    return out;
}

MeanCI normal_ci(const std::vector<std::optional<double>>& values)
{
    MeanCI c;
    std::vector<double> v;
    for (const auto& x : values)
        if (x)
            v.push_back(*x);
    c.n = static_cast<int>(v.size());
    if (c.n == 0)
        return c;
    c.mean = std::accumulate(v.begin(), v.end(), 0.0) / c.n;
    if (c.n > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - c.mean) * (x - c.mean);
        c.sd = std::sqrt(ss / (c.n - 1));
    }
    const double half = 1.96 * c.sd / std::sqrt(static_cast<double>(c.n));
    c.lo = c.mean - half;
    c.hi = c.mean + half;
    return c;
}

double percentile_sorted(const std::vector<double>& v, double q)
{
    if (v.empty())
        throw ContractViolation("percentile of an empty sample");
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

BootstrapCI paired_bootstrap(const std::vector<double>& diffs, int resamples, std::uint64_t seed)
{
    if (diffs.size() < 2)
        throw ConfigError(fmt::format("bootstrap needs at least 2 values, got {}", diffs.size()));
    if (resamples < 1)
        throw ConfigError("bootstrap needs at least one resample");
    const std::size_t n = diffs.size();
    // Means are taken of deviations from the first value so that a constant
    // sample resamples to exactly that constant.
    const double shift = diffs[0];
    auto mean_of = [&](auto&& pick) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += pick(k) - shift;
        return shift + s / static_cast<double>(n);
    };
    BootstrapCI ci;
    ci.mean = mean_of([&](std::size_t k) { return diffs[k]; });
    Rng rng(seed);
    std::vector<double> means(resamples);
    for (int b = 0; b < resamples; ++b)
        means[b] = mean_of([&](std::size_t) { return diffs[rng.below(n)]; });
    std::sort(means.begin(), means.end());
    ci.lo = percentile_sorted(means, 0.025);
    ci.hi = percentile_sorted(means, 0.975);
    return ci;
}

std::vector<LambdaRow> lambda_sweep(const std::map<std::string, std::vector<TraceEpisode>>& traces,
                                    const std::vector<double>& lambdas)
{
    std::vector<LambdaRow> out;
    for (const auto& [policy, eps] : traces) {
        for (double lam : lambdas) {
            LambdaRow row;
            row.policy = policy;
            row.lambda = lam;
            for (const auto& e : eps) {
                const double H = e.horizon;
                row.sigma += (e.sum_u - lam * e.sum_e) / H;
                row.sigma_req += (e.sum_completed - lam * e.sum_missed) / H;
            }
            if (!eps.empty()) {
                row.sigma /= static_cast<double>(eps.size());
                row.sigma_req /= static_cast<double>(eps.size());
            }
            out.push_back(row);
        }
    }
    return out;
}

std::optional<double> crossover_lambda(double a0, double a1, double b0, double b1)
{
    if (a1 == b1)
        return std::nullopt;
    return (a0 - b0) / (a1 - b1);
}

int oracle_tau(const std::map<int, double>& validation_means, bool higher_is_better)
{
    if (validation_means.empty())
        throw ConfigError("oracle_tau: no candidate thresholds");
    int best = validation_means.begin()->first;
    double best_v = validation_means.begin()->second;
    for (const auto& [tau, v] : validation_means) {
        if (higher_is_better ? v > best_v : v < best_v) {
            best = tau;
            best_v = v;
        }
    }
    return best;
}

FairnessReport fairness_from_masses(const std::vector<double>& served, const std::vector<double>& expired)
{
    FairnessReport f;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k < served.size(); ++k) {
        const double d = served[k] + expired[k];
        const double r = d > 0 ? expired[k] / d : 0.0;
        f.rho_k.push_back(r);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    f.max_min_ratio = lo > 0 ? hi / lo : (hi > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    return f;
}

FairnessReport fairness_report(const std::vector<EpisodeResult>& episodes)
{
    std::vector<double> s, e;
    for (const auto& r : episodes) {
        if (s.empty()) {
            s.assign(r.served_by_cache.size(), 0.0);
            e.assign(r.expired_by_cache.size(), 0.0);
        }
        for (std::size_t k = 0; k < s.size(); ++k) {
            s[k] += r.served_by_cache[k];
            e[k] += r.expired_by_cache[k];
        }
    }
    return fairness_from_masses(s, e);
}

EvalReport build_report(const EvalPlan& plan, const std::vector<EpisodeResult>& results,
                        const std::vector<std::string>& metrics, const std::string& reference)
{
    EvalReport rep;
    for (const auto& reg : plan.regimes) {
        for (const auto& pol : plan.policies) {
            for (const auto& m : metrics)
                rep.rows.push_back({reg.name, pol->name(), m, normal_ci(per_seed_means(results, reg.name, pol->name(), m, plan.seeds))});
        }
        if (reference.empty())
            continue;
        for (const auto& pol : plan.policies) {
            if (pol->name() == reference)
                continue;
            for (const auto& m : metrics) {
                auto a = per_seed_means(results, reg.name, pol->name(), m, plan.seeds);
                auto b = per_seed_means(results, reg.name, reference, m, plan.seeds);
                std::vector<double> d;
                for (std::size_t k = 0; k < a.size(); ++k)
                    if (a[k] && b[k])
                        d.push_back(*a[k] - *b[k]);
                if (d.size() < 2)
                    continue;
                rep.paired.push_back({reg.name, pol->name(), reference, m,
                                      paired_bootstrap(d, plan.bootstrap_resamples, plan.report_seed)});
            }
        }
    }
    return rep;
}

std::string render_tsv(const EvalReport& r)
{
    std::ostringstream o;
    o << "regime\tpolicy\tmetric\tn_seeds\tmean\tsd\tci_lo\tci_hi\n";
    for (const auto& row : r.rows)
        o << fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", row.regime, row.policy, row.metric,
                         row.ci.n, row.ci.mean, row.ci.sd, row.ci.lo, row.ci.hi);
    if (!r.paired.empty()) {
        o << "regime\tpolicy\treference\tmetric\tdiff_mean\tboot_lo\tboot_hi\n";
        for (const auto& p : r.paired)
            o << fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n", p.regime, p.policy_a, p.policy_b, p.metric,
                             p.ci.mean, p.ci.lo, p.ci.hi);
    }
    return o.str();
}

std::string render_text(const EvalReport& r)
{
    std::ostringstream o;
    std::vector<std::string> regimes, policies, metrics;
    auto add = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end())
            v.push_back(s);
    };
    for (const auto& row : r.rows) {
        add(regimes, row.regime);
        add(policies, row.policy);
        add(metrics, row.metric);
    }
    for (const auto& reg : regimes) {
        o << fmt::format("Regime {} (per-seed means; mean +- 95% normal CI half-width)\n", reg);
        o << fmt::format("{:<14}", "policy");
        for (const auto& m : metrics)
            o << fmt::format(" {:>18}", m);
        o << "\n";
        for (const auto& pol : policies) {
            o << fmt::format("{:<14}", pol);
            for (const auto& m : metrics) {
                auto it = std::find_if(r.rows.begin(), r.rows.end(), [&](const ReportRow& x) {
                    return x.regime == reg && x.policy == pol && x.metric == m;
                });
                if (it == r.rows.end() || it->ci.n == 0)
                    o << fmt::format(" {:>18}", "---");
                else
                    o << fmt::format(" {:>18}", fmt::format("{:.3f} +- {:.3f}", it->ci.mean, it->ci.hi - it->ci.mean));
            }
            o << "\n";
        }
        bool any = false;
        for (const auto& p : r.paired) {
            if (p.regime != reg)
                continue;
            if (!any)
                o << "Paired differences vs reference (95% percentile bootstrap over seeds)\n";
            any = true;
            o << fmt::format("  {:<14} - {:<14} {:<16} {:+.4f} [{:+.4f}, {:+.4f}]\n", p.policy_a, p.policy_b, p.metric,
                             p.ci.mean, p.ci.lo, p.ci.hi);
        }
        o << "\n";
    }
    return o.str();
}

} // namespace xorsim
