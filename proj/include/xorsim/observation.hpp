#pragma once

#include "xorsim/engine.hpp"

#include <Eigen/Dense>

#include <vector>

namespace xorsim {

enum class Track { A, B };

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kSizeClip = 6;

int request_width(int n_caches, Track t);
inline constexpr int pair_width(Track t) { return t == Track::A ? 8 : 11; }

// Request row r (slot order):
//   [0, K)     one-hot dest
//   [K, 2K)    side-info flags
//   2K         d_r / D
//   2K+1       min(|f_r|, 6) / 6
//   2K+2       deg(r) / (Q-1)
//   2K+3       Track B: min(m(f_r), m_cap) / m_cap, m_cap = 6 p_0
// Pair row m < |M_t| for merge_set[m] = (i, j):
//   0 |S_i & S_j| / K     1 deg_i / (Q-1)   2 deg_j / (Q-1)   3 min(d_i, d_j) / D
//   4 min(|f_i|, 6) / 6   5 min(|f_j|, 6) / 6   6 i / (Q-1)   7 j / (Q-1)
//   Track B: 8 mass(f_i), 9 mass(f_j), 10 mass(f_i | f_j), each clipped like the request row.
// Rows m >= |M_t| are zero. Deadlines are clamped to [0, D] before scaling.
struct Observation {
    Track track = Track::A;
    FeatureMatrix request_features; // Q x d_req
    FeatureMatrix pair_features;    // P_max x d_pair
    ActionMask mask;

    // Request matrix row-major, then pair matrix row-major.
    std::vector<double> flat() const;
};

Observation encode(const SimState& s, Track track = Track::A);

// Fraction of queue records whose packet set reaches the observation clip.
double clip_fraction(const SimState& s);

} // namespace xorsim
