#pragma once

// Equality saturation loop: width reduction plus rule application, bounded by
// iteration, node and time limits.

#include <string>
#include <vector>

#include <json.hpp>

#include "wlec/egraph.hpp"
#include "wlec/rewrites.hpp"

namespace wlec {

struct SaturationLimits {
  size_t max_iterations = 5;
  size_t max_nodes = 50000;
  double time_limit_s = 60.0;
  bool width_reduction = true;
  /// Stop as soon as the two roots share a class.
  bool stop_when_merged = true;
};

struct IterationStats {
  size_t width_reduced = 0;
  size_t matches = 0;
  size_t merged = 0;
  size_t already_equal = 0;
  size_t failed = 0;
  size_t classes = 0;
  size_t nodes = 0;
  double seconds = 0;
  std::map<std::string, size_t> merges_by_rule;
};

enum class StopReason : uint8_t { RootsMerged, Saturated, IterationLimit, NodeLimit, TimeLimit };
std::string_view to_string(StopReason r);

struct SaturationReport {
  std::vector<IterationStats> iterations;
  StopReason stop = StopReason::Saturated;
  bool roots_merged = false;
  double seconds = 0;

  nlohmann::json to_json() const;
};

SaturationReport saturate(EGraph& g, const std::vector<Rule>& rules, const SaturationLimits& limits = {});

}  // namespace wlec
