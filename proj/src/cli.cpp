#include "xorsim/cli.hpp"
#include "xorsim/audit.hpp"
#include "xorsim/errors.hpp"
#include "xorsim/eval.hpp"
#include "xorsim/planner.hpp"
#include "xorsim/trace.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace xorsim {

std::vector<int> parse_seed_list(const std::string& text)
{
    std::vector<int> out;
    std::stringstream in(text);
    std::string part;
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size() || v < 0)
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("seeds: cannot parse '{}'", s));
        }
    };
    while (std::getline(in, part, ',')) {
        if (part.empty())
            continue;
        if (auto dash = part.find('-'); dash != std::string::npos) {
            int a = num(part.substr(0, dash));
            int b = num(part.substr(dash + 1));
            if (b < a)
                throw ConfigError(fmt::format("seeds: empty range '{}'", part));
            for (int s = a; s <= b; ++s)
                out.push_back(s);
        } else {
            out.push_back(num(part));
        }
    }
    if (out.empty())
        throw ConfigError("seeds: empty list");
    return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, sep))
        if (!part.empty())
            out.push_back(part);
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what)
{
    std::vector<double> out;
    for (const auto& p : split(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(p, &used));
            if (used != p.size())
                throw std::invalid_argument(p);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("{}: cannot parse '{}'", what, p));
        }
    }
    if (out.empty())
        throw ConfigError(fmt::format("{}: empty list", what));
    return out;
}

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;

    SystemConfig load() const
    {
        SystemConfig cfg;
        std::string path = config_path;
        if (path.empty())
            if (const char* env = std::getenv(kConfigEnvVar))
                path = env;
        if (!path.empty())
            cfg = load_config_file(path);
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
            apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        cfg.validate();
        return cfg;
    }

    void add_to(CLI::App* app)
    {
        app->add_option("-c,--config", config_path,
                        fmt::format("key/value config file (default: ${} if set)", kConfigEnvVar));
        app->add_option("--set", overrides, "override one config key, key=value (repeatable)");
    }
};

std::vector<PolicyPtr> make_policies(const std::vector<std::string>& names)
{
    std::vector<PolicyPtr> out;
    for (const auto& n : names)
        out.push_back(make_policy(n));
    return out;
}

std::vector<Regime> make_regimes(const std::vector<std::string>& names, const SystemConfig& base)
{
    std::vector<Regime> out;
    for (const auto& n : names)
        out.push_back(n == "config" ? Regime{"config", base} : find_regime(n, base));
    return out;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw SimulationError(fmt::format("cannot write '{}'", path));
    return f;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    auto f = open_out(path);
    f << text;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deadline-constrained coded-caching delivery simulator"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // run
    Common run_c;
    std::string run_policy = "sacm++";
    std::uint64_t run_seed = episode_seed(50, 0);
    std::string run_trace;
    bool run_verbose = false;
    auto* run = app.add_subcommand("run", "simulate one episode and write its step trace");
    run_c.add_to(run);
    run->add_option("-p,--policy", run_policy, "policy name")->capture_default_str();
    run->add_option("-s,--seed", run_seed, "episode seed")->capture_default_str();
    run->add_option("-o,--trace", run_trace, "trace file (default stdout)");
    run->add_flag("-v,--verbose", run_verbose, "include full ID and packet lists");

    // eval
    Common ev_c;
    std::string ev_policies = "ed-unicast,gcm,sacm,sacm+,sacm++,sacm++pop,taufit:0,taufit:1,taufit:2,taufit:3";
    std::string ev_regimes = "id-default";
    std::string ev_seeds = "50-99";
    int ev_episodes = 200;
    int ev_workers = 1;
    std::string ev_metrics = "rho,delta,sigma,mu,g,epsilon,merge_rate,opp_rate,eta_req,m_req";
    std::string ev_reference;
    std::string ev_out, ev_text, ev_trace_dir;
    int ev_resamples = 10000;
    std::uint64_t ev_report_seed = 20240601;
    double ev_lambda = 1.0;
    auto* ev = app.add_subcommand("eval", "paired multi-policy evaluation over a seed grid");
    ev_c.add_to(ev);
    ev->add_option("--policies", ev_policies, "comma-separated policy names")->capture_default_str();
    ev->add_option("--regimes", ev_regimes, "comma-separated regime names ('config' = the loaded config)")
        ->capture_default_str();
    ev->add_option("--seeds", ev_seeds, "base seeds, e.g. 50-99")->capture_default_str();
    ev->add_option("--episodes", ev_episodes, "episodes per seed")->capture_default_str();
    ev->add_option("-j,--workers", ev_workers, "worker threads")->capture_default_str();
    ev->add_option("--metrics", ev_metrics, "comma-separated metric names")->capture_default_str();
    ev->add_option("--reference", ev_reference, "policy for paired bootstrap differences");
    ev->add_option("--resamples", ev_resamples, "bootstrap resamples")->capture_default_str();
    ev->add_option("--report-seed", ev_report_seed, "bootstrap seed")->capture_default_str();
    ev->add_option("--lambda", ev_lambda, "expiration weight of sigma")->capture_default_str();
    ev->add_option("-o,--out", ev_out, "flat TSV report (default stdout)");
    ev->add_option("--text", ev_text, "human-readable table file");
    ev->add_option("--trace-dir", ev_trace_dir, "write <policy>.jsonl traces here");

    // sweep-lambda
    std::vector<std::string> sl_traces;
    std::string sl_lambdas = "0,0.25,0.5,0.75,1,1.25,1.5,2";
    std::string sl_pair;
    auto* sl = app.add_subcommand("sweep-lambda", "recompute sigma(lambda) from traces");
    sl->add_option("traces", sl_traces, "trace files, policy=path or path (policy = file stem)")->required();
    sl->add_option("--lambdas", sl_lambdas, "comma-separated lambdas")->capture_default_str();
    sl->add_option("--crossover", sl_pair, "policyA,policyB: report where their sigma_req lines cross");

    // sweep-tau
    Common st_c;
    std::string st_val = "0-49", st_hold = "50-99";
    int st_episodes = 200, st_workers = 1;
    auto* st = app.add_subcommand("sweep-tau", "tau-Fit thresholds 0..3 on validation, oracle tau on holdout");
    st_c.add_to(st);
    st->add_option("--validation-seeds", st_val)->capture_default_str();
    st->add_option("--holdout-seeds", st_hold)->capture_default_str();
    st->add_option("--episodes", st_episodes)->capture_default_str();
    st->add_option("-j,--workers", st_workers)->capture_default_str();

    // sweep-erasure
    Common se_c;
    std::string se_policies = "ed-unicast,sacm++,taufit:2";
    std::string se_seeds = "50-59";
    int se_episodes = 200, se_workers = 1;
    std::string se_grid = "0,0.05,0.10,0.20";
    auto* se = app.add_subcommand("sweep-erasure", "coded-broadcast erasure sweep");
    se_c.add_to(se);
    se->add_option("--policies", se_policies)->capture_default_str();
    se->add_option("--seeds", se_seeds)->capture_default_str();
    se->add_option("--episodes", se_episodes)->capture_default_str();
    se->add_option("-j,--workers", se_workers)->capture_default_str();
    se->add_option("--grid", se_grid)->capture_default_str();

    // teach
    Common te_c;
    long te_samples = 1000;
    std::string te_out;
    std::string te_mode = "bc";
    std::string te_track = "A";
    std::uint64_t te_seed = 7;
    bool te_mixing = false;
    auto* te = app.add_subcommand("teach", "label states with the rollout teacher and write a dataset");
    te_c.add_to(te);
    te->add_option("-n,--samples", te_samples)->capture_default_str();
    te->add_option("-o,--out", te_out, "dataset file")->required();
    te->add_option("--mode", te_mode, "bc or exit (planner presets)")->capture_default_str();
    te->add_option("--track", te_track, "A or B")->capture_default_str();
    te->add_option("--seed", te_seed)->capture_default_str();
    te->add_flag("--mixing", te_mixing, "roll in with SACM++ except with probability 0.20");

    // audit
    Common au_c;
    long au_steps = 100000;
    std::uint64_t au_seed = 1;
    std::string au_mutant = "none";
    auto* au = app.add_subcommand("audit", "run the invariant property suites");
    au_c.add_to(au);
    au->add_option("-n,--trials", au_steps, "decision steps to simulate")->capture_default_str();
    au->add_option("--seed", au_seed)->capture_default_str();
    au->add_option("--mutant", au_mutant, "none, refill-after-decrement, union-side-info")->capture_default_str();

    // report
    std::string rp_in, rp_out;
    auto* rp = app.add_subcommand("report", "render an eval TSV as text tables");
    rp->add_option("input", rp_in, "TSV written by eval")->required();
    rp->add_option("-o,--out", rp_out, "output file (default stdout)");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        if (!argv_rev.empty())
            argv_rev.pop_back();
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*run) {
            const SystemConfig cfg = run_c.load();
            const PolicyPtr pol = make_policy(run_policy);
            std::vector<std::string> lines{trace_begin_line(run_seed, cfg.horizon)};
            run_episode(reset(cfg, run_seed), *pol, 1.0, 1.0, &lines, run_verbose);
            std::string text;
            for (const auto& l : lines)
                text += l + "\n";
            write_or_print(run_trace, text, out);
        } else if (*ev) {
            const SystemConfig cfg = ev_c.load();
            EvalPlan plan;
            plan.regimes = make_regimes(split(ev_regimes, ','), cfg);
            plan.policies = make_policies(split(ev_policies, ','));
            plan.seeds = parse_seed_list(ev_seeds);
            plan.episodes_per_seed = ev_episodes;
            plan.workers = ev_workers;
            plan.bootstrap_resamples = ev_resamples;
            plan.report_seed = ev_report_seed;
            plan.lambda = ev_lambda;
            if (ev_episodes < 1)
                throw ConfigError("--episodes must be at least 1");
            const auto metrics = split(ev_metrics, ',');
            for (const auto& m : metrics)
                (void)EpisodeSummary{}.get(m);
            if (!ev_reference.empty())
                (void)make_policy(ev_reference);
            const auto results = run_plan(plan);
            const EvalReport rep = build_report(plan, results, metrics, ev_reference);
            write_or_print(ev_out, render_tsv(rep), out);
            if (!ev_text.empty())
                write_or_print(ev_text, render_text(rep), out);
            if (!ev_trace_dir.empty()) {
                std::filesystem::create_directories(ev_trace_dir);
                for (const auto& reg : plan.regimes) {
                    for (const auto& pol : plan.policies) {
                        auto f = open_out((std::filesystem::path(ev_trace_dir) /
                                           fmt::format("{}__{}.jsonl", reg.name, pol->name()))
                                              .string());
                        for (int s : plan.seeds) {
                            for (int e = 0; e < plan.episodes_per_seed; ++e) {
                                const auto seed = episode_seed(s, e);
                                std::vector<std::string> lines{trace_begin_line(seed, reg.cfg.horizon)};
                                run_episode(reset(reg.cfg, seed), *pol, plan.lambda, 1.0, &lines);
                                for (const auto& l : lines)
                                    f << l << "\n";
                            }
                        }
                    }
                }
            }
        } else if (*sl) {
            std::map<std::string, std::vector<TraceEpisode>> traces;
            for (const auto& t : sl_traces) {
                std::string name, path = t;
                if (auto eq = t.find('='); eq != std::string::npos) {
                    name = t.substr(0, eq);
                    path = t.substr(eq + 1);
                } else {
                    name = std::filesystem::path(t).stem().string();
                }
                std::ifstream f(path);
                if (!f)
                    throw ConfigError(fmt::format("cannot open trace '{}'", path));
                traces[name] = read_trace(f);
            }
            const auto rows = lambda_sweep(traces, parse_doubles(sl_lambdas, "--lambdas"));
            std::string text = "policy\tlambda\tsigma\tsigma_req\n";
            for (const auto& r : rows)
                text += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\n", r.policy, r.lambda, r.sigma, r.sigma_req);
            if (!sl_pair.empty()) {
                auto p = split(sl_pair, ',');
                if (p.size() != 2 || !traces.count(p[0]) || !traces.count(p[1]))
                    throw ConfigError("--crossover expects two policies present in the traces");
                auto fit = [&](const std::string& n) {
                    const auto r = lambda_sweep({{n, traces[n]}}, {0.0, 1.0});
                    return std::pair<double, double>{r[0].sigma_req, r[0].sigma_req - r[1].sigma_req};
                };
                auto [a0, a1] = fit(p[0]);
                auto [b0, b1] = fit(p[1]);
                auto x = crossover_lambda(a0, a1, b0, b1);
                text += x ? fmt::format("crossover\t{}\t{}\t{:.6f}\n", p[0], p[1], *x)
                          : fmt::format("crossover\t{}\t{}\tnone\n", p[0], p[1]);
            }
            out << text;
        } else if (*st) {
            const SystemConfig cfg = st_c.load();
            const std::vector<std::string> metrics = {"rho", "sigma", "delta", "m_req", "sigma_req"};
            const std::map<std::string, bool> higher = {
                {"rho", false}, {"sigma", true}, {"delta", true}, {"m_req", false}, {"sigma_req", true}};
            EvalPlan val;
            val.regimes = {{"config", cfg}};
            val.policies = make_policies({"taufit:0", "taufit:1", "taufit:2", "taufit:3"});
            val.seeds = parse_seed_list(st_val);
            val.episodes_per_seed = st_episodes;
            val.workers = st_workers;
            const auto vres = run_plan(val);
            EvalPlan hold = val;
            hold.seeds = parse_seed_list(st_hold);
            const auto hres = run_plan(hold);
            std::string text = "metric\ttau\tvalidation_mean\n";
            std::string picks = "metric\toracle_tau\tholdout_mean\tholdout_ci_lo\tholdout_ci_hi\n";
            for (const auto& m : metrics) {
                std::map<int, double> means;
                for (int tau = 0; tau <= 3; ++tau) {
                    means[tau] = normal_ci(per_seed_means(vres, "config", fmt::format("taufit:{}", tau), m, val.seeds)).mean;
                    text += fmt::format("{}\t{}\t{:.6f}\n", m, tau, means[tau]);
                }
                const int best = oracle_tau(means, higher.at(m));
                const auto ci = normal_ci(per_seed_means(hres, "config", fmt::format("taufit:{}", best), m, hold.seeds));
                picks += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n", m, best, ci.mean, ci.lo, ci.hi);
            }
            out << text << picks;
        } else if (*se) {
            const SystemConfig cfg = se_c.load();
            std::string text = "erasure_prob\tpolicy\trho\trho_ci_lo\trho_ci_hi\tsigma\tmu\n";
            for (double eps : parse_doubles(se_grid, "--grid")) {
                SystemConfig c = cfg;
                c.erasure_prob = eps;
                c.validate();
                EvalPlan plan;
                plan.regimes = {{"config", c}};
                plan.policies = make_policies(split(se_policies, ','));
                plan.seeds = parse_seed_list(se_seeds);
                plan.episodes_per_seed = se_episodes;
                plan.workers = se_workers;
                const auto res = run_plan(plan);
                for (const auto& p : plan.policies) {
                    auto rho = normal_ci(per_seed_means(res, "config", p->name(), "rho", plan.seeds));
                    auto sig = normal_ci(per_seed_means(res, "config", p->name(), "sigma", plan.seeds));
                    auto mu = normal_ci(per_seed_means(res, "config", p->name(), "mu", plan.seeds));
                    text += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", eps, p->name(), rho.mean,
                                        rho.lo, rho.hi, sig.mean, mu.mean);
                }
            }
            out << text;
        } else if (*te) {
            const SystemConfig cfg = te_c.load();
            PlannerConfig pc;
            if (te_mode == "bc")
                pc = PlannerConfig::behavior_cloning();
            else if (te_mode == "exit")
                pc = PlannerConfig::expert_iteration();
            else
                throw ConfigError(fmt::format("--mode: expected bc or exit, got '{}'", te_mode));
            DatasetOptions opts;
            if (te_track == "A")
                opts.track = Track::A;
            else if (te_track == "B")
                opts.track = Track::B;
            else
                throw ConfigError(fmt::format("--track: expected A or B, got '{}'", te_track));
            opts.seed = te_seed;
            opts.mixing = te_mixing;
            if (te_samples < 0)
                throw ConfigError("--samples must be nonnegative");
            auto f = open_out(te_out);
            const long n = emit_bc_dataset(te_samples, cfg, pc, opts, f);
            out << fmt::format("wrote {} records to {}\n", n, te_out);
        } else if (*au) {
            AuditOptions o;
            o.cfg = au_c.load();
            o.n_steps = au_steps;
            o.seed = au_seed;
            if (au_mutant == "none")
                o.mutant = Mutant::None;
            else if (au_mutant == "refill-after-decrement")
                o.mutant = Mutant::RefillAfterDecrement;
            else if (au_mutant == "union-side-info")
                o.mutant = Mutant::UnionSideInfo;
            else
                throw ConfigError(fmt::format("--mutant: unknown mutant '{}'", au_mutant));
            const AuditReport rep = run_audit(o);
            out << rep.render();
            return rep.ok() ? kExitOk : kExitSimulation;
        } else if (*rp) {
            std::ifstream f(rp_in);
            if (!f)
                throw ConfigError(fmt::format("cannot open report '{}'", rp_in));
            EvalReport rep;
            std::string line;
            bool header = false;
            while (std::getline(f, line)) {
                auto cols = split(line, '\t');
                if (cols.empty())
                    continue;
                if (cols[0] == "regime") {
                    header = cols.size() == 8;
                    continue;
                }
                try {
                    if (header && cols.size() == 8) {
                        ReportRow r{cols[0], cols[1], cols[2], {}};
                        r.ci.n = std::stoi(cols[3]);
                        r.ci.mean = std::stod(cols[4]);
                        r.ci.sd = std::stod(cols[5]);
                        r.ci.lo = std::stod(cols[6]);
                        r.ci.hi = std::stod(cols[7]);
                        rep.rows.push_back(r);
                    } else if (!header && cols.size() == 7) {
                        rep.paired.push_back({cols[0], cols[1], cols[2], cols[3],
                                              {std::stod(cols[4]), std::stod(cols[5]), std::stod(cols[6])}});
                    } else {
                        throw ConfigError(fmt::format("report: malformed row '{}'", line));
                    }
                } catch (const std::invalid_argument&) {
                    throw ConfigError(fmt::format("report: malformed number in '{}'", line));
                }
            }
            write_or_print(rp_out, render_text(rep), out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SimulationError& e) {
        err << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitSimulation;
    }
    return kExitOk;
}

} // namespace xorsim
