#include "helpers.hpp"

#include "xorsim/observation.hpp"
#include "xorsim/policy.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace xorsim;
using namespace testutil;

namespace {

std::vector<int> partner_counts(const SimState& s)
{
    std::vector<std::vector<int>> partners(s.queue.size());
    for (const Pair& p : s.merge_set) {
        partners[p.i].push_back(p.j);
        partners[p.j].push_back(p.i);
    }
    std::vector<int> out;
    for (auto& v : partners) {
        std::sort(v.begin(), v.end());
        out.push_back(static_cast<int>(std::unique(v.begin(), v.end()) - v.begin()));
    }
    return out;
}

// Reference encoder for Track A, written from the layout table.
std::vector<double> reference_flat(const SimState& s)
{
    const int K = s.cfg.n_caches, Q = s.cfg.queue_depth, D = s.cfg.max_deadline;
    const auto deg = partner_counts(s);
    std::vector<double> v;
    for (int q = 0; q < Q; ++q) {
        const QueueRecord& r = s.queue[q];
        for (int k = 0; k < K; ++k)
            v.push_back(r.dest == k ? 1.0 : 0.0);
        for (int k = 0; k < K; ++k)
            v.push_back(has_cache(r.side_info, k) ? 1.0 : 0.0);
        v.push_back(std::clamp(r.deadline, 0, D) / double(D));
        v.push_back(std::min<int>(r.packets.size(), 6) / 6.0);
        v.push_back(deg[q] / double(Q - 1));
    }
    for (int m = 0; m < s.cfg.max_pairs(); ++m) {
        if (m >= s.n_merges()) {
            v.insert(v.end(), 8, 0.0);
            continue;
        }
        const auto [i, j] = s.merge_set[m];
        const QueueRecord &a = s.queue[i], &b = s.queue[j];
        v.push_back(cache_count(a.side_info & b.side_info) / double(K));
        v.push_back(deg[i] / double(Q - 1));
        v.push_back(deg[j] / double(Q - 1));
        v.push_back(std::clamp(std::min(a.deadline, b.deadline), 0, D) / double(D));
        v.push_back(std::min<int>(a.packets.size(), 6) / 6.0);
        v.push_back(std::min<int>(b.packets.size(), 6) / 6.0);
        v.push_back(i / double(Q - 1));
        v.push_back(j / double(Q - 1));
    }
    return v;
}

} // namespace

TEST_CASE("observation widths")
{
    CHECK(request_width(5, Track::A) == 13);
    CHECK(request_width(5, Track::B) == 14);
    CHECK(pair_width(Track::A) == 8);
    CHECK(pair_width(Track::B) == 11);
    SystemConfig cfg;
    const SimState s = reset(cfg, 1);
    const Observation a = encode(s, Track::A), b = encode(s, Track::B);
    CHECK(a.request_features.rows() == 10);
    CHECK(a.request_features.cols() == 13);
    CHECK(a.pair_features.rows() == 45);
    CHECK(a.pair_features.cols() == 8);
    CHECK(a.flat().size() == 130 + 360);
    CHECK(b.request_features.cols() == 14);
    CHECK(b.pair_features.cols() == 11);
    CHECK(a.mask.size() == 91);
    CHECK(a.mask == action_mask(s));
}

TEST_CASE("worked example r0 features")
{
    const SimState s = worked_example();
    const Observation o = encode(s);
    const auto r0 = o.request_features.row(0);
    CHECK(r0(0) == 1.0);
    CHECK(r0(1) == 0.0);
    CHECK(r0(2) == 0.0);
    CHECK(r0(3) == 0.0);
    CHECK(r0(4) == 1.0);
    CHECK(r0(5) == 1.0);
    CHECK(r0(6) == doctest::Approx(0.25));
    CHECK(r0(7) == doctest::Approx(1.0 / 6));
    CHECK(r0(8) == doctest::Approx(1.0)); // two partners out of Q - 1 = 2
}

TEST_CASE("fresh singleton at full deadline with no partners")
{
    SystemConfig cfg;
    cfg.n_files = 3;
    cfg.subfiles_per_file = 1;
    cfg.cache_fraction = 0.4;
    const SimState s = make_state(cfg, {{}, {}, {}}, {{0, {0}, 20}, {1, {1}, 20}, {2, {2}, 20}});
    const Observation o = encode(s);
    CHECK(o.request_features(0, 6) == 1.0);
    CHECK(o.request_features(0, 7) == doctest::Approx(1.0 / 6));
    CHECK(o.request_features(0, 8) == 0.0);
    CHECK(o.pair_features.isZero());
}

TEST_CASE("large aggregates saturate the size feature")
{
    SystemConfig cfg;
    cfg.n_files = 10;
    cfg.subfiles_per_file = 1;
    cfg.cache_fraction = 0.9;
    std::vector<int> all9 = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    const SimState s = make_state(cfg, {all9, {9}}, {{1, all9, 4}, {0, {9}, 4}});
    CHECK(encode(s).request_features(0, 5) == 1.0);
    CHECK(encode(s).request_features(1, 5) == doctest::Approx(1.0 / 6));
    CHECK(clip_fraction(s) == 0.5);
}

TEST_CASE("encoder agrees with a reference encoder and stays in [0,1]")
{
    SystemConfig cfg;
    long states = 0;
    for (std::uint64_t seed = 0; seed < 2000 && states < 100000; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const Observation o = encode(s, Track::B);
            CHECK(o.request_features.minCoeff() >= 0.0);
            CHECK(o.request_features.maxCoeff() <= 1.0);
            CHECK(o.pair_features.minCoeff() >= 0.0);
            CHECK(o.pair_features.maxCoeff() <= 1.0);
            if (seed < 50)
                CHECK(encode(s, Track::A).flat() == reference_flat(s));
            ++states;
            const int a = seed % 2 ? tau_fit(s, 3) : sacm_family(s, SacmVariant::SacmPlusPlus);
            step(s, a);
        }
    }
    CHECK(states >= 100000);
}

TEST_CASE("pair rows line up with the engine's merge for every valid coded action")
{
    SystemConfig cfg;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimState s = reset(cfg, seed);
        while (!s.done()) {
            const Observation o = encode(s);
            for (int a = 0; a < cfg.unicast_action(); ++a) {
                if (!o.mask[a])
                    continue;
                const int m = a / 2;
                SimState c = clone_env(s);
                const StepOutcome out = step(c, a);
                REQUIRE(out.kind == StepKind::CodedMerge);
                CHECK(o.pair_features(m, 6) == doctest::Approx(out.pair.i / 9.0));
                CHECK(o.pair_features(m, 7) == doctest::Approx(out.pair.j / 9.0));
                CHECK(o.pair_features(m, 0) == doctest::Approx(out.intersection / 5.0));
            }
            for (int m = s.n_merges(); m < cfg.max_pairs(); ++m)
                CHECK(o.pair_features.row(m).isZero());
            step(s, gcm(s));
        }
    }
}

TEST_CASE("track B popularity features")
{
    SystemConfig cfg;
    cfg.demand_law = DemandLaw::zipf(0.8);
    const SimState s = reset(cfg, 3);
    const Observation o = encode(s, Track::B);
    const double cap = 6 * s.demand->probability(0);
    for (int q = 0; q < cfg.queue_depth; ++q) {
        const double m = pop_mass(s.queue[q].packets, *s.demand, cfg.subfiles_per_file);
        CHECK(o.request_features(q, 13) == doctest::Approx(std::min(m, cap) / cap));
    }
}

TEST_CASE("flat vector of the seed 50000042 initial state matches the frozen file")
{
    SystemConfig cfg;
    const SimState s = reset(cfg, episode_seed(50, 0));
    const std::vector<double> flat = encode(s).flat();
    CHECK(flat == reference_flat(s));
    const auto lines = read_lines(golden_path("obs_seed50000042_trackA.txt"));
    REQUIRE(lines.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i)
        CHECK(flat[i] == doctest::Approx(std::stod(lines[i])).epsilon(1e-15));
}
