#pragma once

#include "xorsim/engine.hpp"
#include "xorsim/observation.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace xorsim {

// Decision rule. Baselines are pure functions of the state and use no randomness.
class Policy {
public:
    virtual ~Policy() = default;
    virtual int act(const SimState& s) const = 0;
    virtual std::string name() const = 0;
};

using PolicyPtr = std::shared_ptr<const Policy>;

enum class SacmVariant { Sacm, SacmPlus, SacmPlusPlus, SacmPlusPlusPop };

int ed_unicast(const SimState& s);
int gcm(const SimState& s);
int sacm_family(const SimState& s, SacmVariant v);
int misfit(const QueueRecord& ri, const QueueRecord& rj);
int tau_fit(const SimState& s, int tau);

// Index of (i, j) in the merge set, or -1.
int pair_index_of(const SimState& s, int i, int j);

// Wraps a callback for policies that live outside the library. The callback sees
// the encoded observation and mask; a masked-invalid answer is a PolicyFault.
class ExternalPolicy : public Policy {
public:
    using Callback = std::function<int(const Observation&)>;
    ExternalPolicy(std::string name, Callback cb, Track track = Track::A)
        : name_(std::move(name)), cb_(std::move(cb)), track_(track)
    {
    }
    int act(const SimState& s) const override;
    std::string name() const override { return name_; }

private:
    std::string name_;
    Callback cb_;
    Track track_;
};

// ed-unicast, gcm, sacm, sacm+, sacm++, sacm++pop, taufit:<n>, perfect-fit
// (= taufit:0), first-fit (= taufit:3). "external" needs a callback and is not
// built here. Unknown names throw ConfigError.
PolicyPtr make_policy(const std::string& name);
std::vector<std::string> builtin_policy_names();

} // namespace xorsim
