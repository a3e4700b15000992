#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dilemma {

/// Per-scenario tallies folded out of a trial log. For 2x2 game scenarios
/// n_coop + n_defect == n_ok; contribution scenarios collect raw amounts
/// instead.
struct ScenarioCounts {
  std::int64_t n_ok = 0;
  std::int64_t n_coop = 0;
  std::int64_t n_defect = 0;
  std::int64_t n_invalid = 0;
  std::vector<double> contributions;

  std::int64_t n_total() const { return n_ok + n_invalid; }
};

using AggregateMap = std::map<std::string, ScenarioCounts>;

}  // namespace dilemma
