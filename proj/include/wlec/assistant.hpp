#pragma once

// End-to-end flow: parse, initialize, saturate, extract, build the waterfall,
// check it and write the artifacts.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlec/extract.hpp"
#include "wlec/oracle.hpp"
#include "wlec/proof.hpp"
#include "wlec/saturate.hpp"

namespace wlec {

struct RunConfig {
  std::string spec_path;
  std::string impl_path;
  /// "none", "default", "catalogue", or a rule file path.
  std::string rules = "default";
  SaturationLimits limits;
  ExtractMethod method = ExtractMethod::Ilp;
  IlpOptions ilp;
  OracleConfig oracle;
  bool width_normalize = false;
  /// Empty means no artifacts are written.
  std::filesystem::path out_dir;
  bool dump_graph = false;

  /// Throws Error when a path is missing or a limit is not positive.
  void validate() const;
};

std::vector<Rule> load_rules(const std::string& which);

struct RunResult {
  Design spec;
  Design impl;
  SaturationReport saturation;
  size_t shared_initial = 0;
  size_t shared_final = 0;
  size_t nodes = 0;
  size_t classes = 0;
  ExtractionResult extraction;
  Waterfall waterfall;
  std::vector<std::string> adjacency_violations;
  WaterfallReport report;
  double seconds = 0;

  /// 0 when every obligation passes, 1 when any fails, 2 otherwise.
  int exit_code() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

RunResult run_assistant(const RunConfig& cfg);

/// Exit code for a checked waterfall: 0 pass, 1 any failure, 2 otherwise.
int verdict_exit_code(const WaterfallReport& r);

/// Human-readable description of the first failing obligation, if any.
std::string describe_failure(const WaterfallReport& r);

}  // namespace wlec
