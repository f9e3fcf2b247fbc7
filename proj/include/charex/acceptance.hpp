#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace charex {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double observed = 0.0;   // worst observed discrepancy / statistic
  double tolerance = 0.0;  // the pinned tolerance it is held against
  std::string detail;      // human-readable summary of what was checked
  double seconds = 0.0;
};

// One-shot verification suite: every top-level acceptance criterion with its
// pinned tolerance.  `seed` feeds the randomized instance draws; criteria
// must hold for any seed.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 7);

}  // namespace charex
