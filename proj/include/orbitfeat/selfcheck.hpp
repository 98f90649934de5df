#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace orbitfeat {

struct SelfCheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Built-in invariance and oracle property suite; each entry is printed by
/// the CLI as one PASS/FAIL line.
std::vector<SelfCheckResult> run_selfcheck(std::uint64_t seed);

}  // namespace orbitfeat
