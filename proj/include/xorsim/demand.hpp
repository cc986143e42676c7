#pragma once

#include "xorsim/config.hpp"
#include "xorsim/rng.hpp"

#include <vector>

namespace xorsim {

// File-popularity law over file indices 0..N-1.
//   Uniform          p_n = 1/N
//   Zipf(a)          p_n ~ (n+1)^-a
//   MandelbrotZipf   p_n ~ (n+q+1)^-a
class Demand {
public:
    Demand(const DemandLaw& law, int n_files);

    // Uniform: one below(N) draw. Otherwise one uniform01() draw mapped through
    // the cumulative table.
    int sample_file(Rng& rng) const;

    double probability(int file) const { return pmf_[file]; }
    const std::vector<double>& pmf() const { return pmf_; }
    const DemandLaw& law() const { return law_; }
    int n_files() const { return static_cast<int>(pmf_.size()); }

    bool operator==(const Demand&) const = default;

private:
    DemandLaw law_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

// Sum of file probabilities over the file projections floor(p/B) of the packets.
double pop_mass(const std::vector<int>& packets, const Demand& demand, int subfiles_per_file);

} // namespace xorsim
