#pragma once

#include <string>
#include <vector>

namespace mscv {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Quick structural checks behind `mscv validate`: estimator identities,
/// conservation of the collision and transport operators, wall flux balance,
/// quadrature exactness and the sample allocation. A few seconds on one core.
std::vector<CheckResult> invariant_suite();

}  // namespace mscv
