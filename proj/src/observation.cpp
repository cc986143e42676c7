#include "xorsim/observation.hpp"

#include <algorithm>

namespace xorsim {

int request_width(int n_caches, Track t) { return 2 * n_caches + (t == Track::A ? 3 : 4); }

namespace {

double clip_size(std::size_t n) { return std::min<double>(static_cast<double>(n), kSizeClip) / kSizeClip; }

std::vector<int> union_of(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace

std::vector<double> Observation::flat() const
{
    std::vector<double> out;
    out.reserve(request_features.size() + pair_features.size());
    out.insert(out.end(), request_features.data(), request_features.data() + request_features.size());
    out.insert(out.end(), pair_features.data(), pair_features.data() + pair_features.size());
    return out;
}

Observation encode(const SimState& s, Track track)
{
    const int K = s.cfg.n_caches;
    const int Q = s.cfg.queue_depth;
    const double D = s.cfg.max_deadline;
    const double qn = Q - 1;
    const int B = s.cfg.subfiles_per_file;
    const double m_cap = kSizeClip * s.demand->probability(0);
    auto mass = [&](const std::vector<int>& f) { return std::min(pop_mass(f, *s.demand, B), m_cap) / m_cap; };
    auto dl = [&](int d) { return std::clamp(static_cast<double>(d), 0.0, D) / D; };

    Observation o;
    o.track = track;
    o.request_features = FeatureMatrix::Zero(Q, request_width(K, track));
    o.pair_features = FeatureMatrix::Zero(s.cfg.max_pairs(), pair_width(track));
    o.mask = action_mask(s);

    const auto deg = merge_degrees(s);
    for (int r = 0; r < Q; ++r) {
        const auto& rec = s.queue[r];
        auto row = o.request_features.row(r);
        row(rec.dest) = 1.0;
        for (int k = 0; k < K; ++k)
            row(K + k) = has_cache(rec.side_info, k) ? 1.0 : 0.0;
        row(2 * K) = dl(rec.deadline);
        row(2 * K + 1) = clip_size(rec.packets.size());
        row(2 * K + 2) = deg[r] / qn;
        if (track == Track::B)
            row(2 * K + 3) = mass(rec.packets);
    }

    for (int m = 0; m < s.n_merges(); ++m) {
        const auto [i, j] = s.merge_set[m];
        const auto& ri = s.queue[i];
        const auto& rj = s.queue[j];
        auto row = o.pair_features.row(m);
        row(0) = static_cast<double>(cache_count(ri.side_info & rj.side_info)) / K;
        row(1) = deg[i] / qn;
        row(2) = deg[j] / qn;
        row(3) = dl(std::min(ri.deadline, rj.deadline));
        row(4) = clip_size(ri.packets.size());
        row(5) = clip_size(rj.packets.size());
        row(6) = i / qn;
        row(7) = j / qn;
        if (track == Track::B) {
            row(8) = mass(ri.packets);
            row(9) = mass(rj.packets);
            row(10) = mass(union_of(ri.packets, rj.packets));
        }
    }
    return o;
}

double clip_fraction(const SimState& s)
{
    int n = 0;
    for (const auto& r : s.queue)
        if (static_cast<int>(r.packets.size()) >= kSizeClip)
            ++n;
    return static_cast<double>(n) / static_cast<double>(s.queue.size());
}

} // namespace xorsim
