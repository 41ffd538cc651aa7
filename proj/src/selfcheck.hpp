#pragma once

#include <string>
#include <vector>

#include "scenario.hpp"

namespace crack {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Structural invariants on small random instances derived from config.seed:
// unitarity, reciprocity under symmetric surfaces, non-reciprocity under the
// pi-offset NR construction, power constraints, ZF nulling, rate identities.
std::vector<CheckResult> run_selfcheck(const ScenarioConfig& config, int samples = 50);

}  // namespace crack
