#include "xorsim/audit.hpp"

#include <doctest.h>

using namespace xorsim;

TEST_CASE("audit: the engine passes every check over 10^5 steps")
{
    AuditOptions o;
    const AuditReport r = run_audit(o);
    INFO(r.render());
    CHECK(r.ok());
    CHECK(r.total_violations() == 0);
    for (const auto& c : r.checks)
        CHECK(c.trials > 0);
    CHECK(r.check("one-gap").trials >= 100000);
    CHECK(r.check("mask-parity").trials >= 100000);
    CHECK(r.freq_lo <= 1.0 / o.cfg.max_deadline);
    CHECK(r.freq_hi >= 1.0 / o.cfg.max_deadline);
}

TEST_CASE("audit: the refill-after-decrement mutant is caught")
{
    AuditOptions o;
    o.n_steps = 30000;
    o.mutant = Mutant::RefillAfterDecrement;
    const AuditReport r = run_audit(o);
    CHECK_FALSE(r.ok());
    CHECK(r.check("refill-timing").violations > 0);
}

TEST_CASE("audit: the union side-information mutant is caught")
{
    AuditOptions o;
    o.n_steps = 30000;
    o.mutant = Mutant::UnionSideInfo;
    const AuditReport r = run_audit(o);
    CHECK_FALSE(r.ok());
    CHECK(r.check("side-info-shrink").violations > 0);
    CHECK(r.check("one-gap").violations > 0);
}
