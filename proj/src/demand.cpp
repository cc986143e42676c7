#include "xorsim/demand.hpp"
#include "xorsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace xorsim {

Demand::Demand(const DemandLaw& law, int n_files) : law_(law), pmf_(n_files), cdf_(n_files)
{
    if (n_files < 1)
        throw ConfigError("n_files: must be at least 1");
    double total = 0.0;
    for (int n = 0; n < n_files; ++n) {
        double w = 1.0;
        if (law.kind == DemandKind::Zipf)
            w = std::pow(n + 1.0, -law.alpha);
        else if (law.kind == DemandKind::MandelbrotZipf)
            w = std::pow(n + law.q + 1.0, -law.alpha);
        pmf_[n] = w;
        total += w;
    }
    double acc = 0.0;
    for (int n = 0; n < n_files; ++n) {
        pmf_[n] /= total;
        acc += pmf_[n];
        cdf_[n] = acc;
    }
    cdf_.back() = 1.0;
}

int Demand::sample_file(Rng& rng) const
{
    if (law_.kind == DemandKind::Uniform)
        return static_cast<int>(rng.below(static_cast<std::uint64_t>(pmf_.size())));
    double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end())
        --it;
    return static_cast<int>(it - cdf_.begin());
}

double pop_mass(const std::vector<int>& packets, const Demand& demand, int subfiles_per_file)
{
    double m = 0.0;
    for (int p : packets)
        m += demand.probability(p / subfiles_per_file);
    return m;
}

} // namespace xorsim
