#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tmem {

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Small-size invariant checks over every module. `inject_fault` perturbs the Pauli-to-projector matrix
/// used by process tomography, which must make at least one check fail.
std::vector<SelftestCheck> run_selftest(std::uint64_t seed, bool inject_fault = false);

}  // namespace tmem
