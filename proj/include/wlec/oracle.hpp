#pragma once

// Simulation-based equivalence checking: exhaustive for narrow inputs,
// seeded sampling otherwise, with an optional external checker command.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlec/frontend.hpp"
#include "wlec/proof.hpp"

namespace wlec {

enum class VerdictStatus : uint8_t { Pass, Fail, Unproven };
enum class CheckMethod : uint8_t { Exhaustive, Random, External, Derived, None };
std::string_view to_string(VerdictStatus s);
std::string_view to_string(CheckMethod m);

struct Verdict {
  VerdictStatus status = VerdictStatus::Unproven;
  CheckMethod method = CheckMethod::None;
  uint64_t vectors = 0;
  /// Input assignment on which the designs differ (fail only).
  std::vector<std::pair<std::string, int64_t>> counterexample;
  int64_t left_value = 0;
  int64_t right_value = 0;
  std::string diagnostic;
  double seconds = 0;

  nlohmann::json to_json() const;
};

struct OracleConfig {
  uint32_t max_exhaustive_bits = 20;
  uint64_t samples = 100000;
  /// Sample count for obligations whose rule is marked trivial.
  uint64_t trivial_samples = 1000;
  uint64_t seed = 1;
  /// Command template with `{left}` and `{right}`; exit 0 pass, 1 fail, else unproven.
  std::string external_cmd;
  unsigned threads = 0;  // 0 picks the hardware concurrency
};

/// Requires identical input ports and output annotations.
Verdict check_equiv(const Design& left, const Design& right, const OracleConfig& cfg,
                    CheckerHint hint = CheckerHint::Simulation);

/// Runs the external command on two files.
Verdict run_external(const std::string& cmd, const std::filesystem::path& left, const std::filesystem::path& right);

struct ObligationResult {
  size_t index = 0;
  std::string kind;
  std::string chain;
  std::string rule;
  std::string hint;
  std::string left;
  std::string right;
  Verdict verdict;
};

struct WaterfallReport {
  std::vector<ObligationResult> obligations;
  bool overall = false;
  bool assume_guarantee = false;
  double seconds = 0;

  nlohmann::json to_json() const;
};

WaterfallReport run_waterfall(const Waterfall& w, const OracleConfig& cfg);
/// Checks the obligations listed in `dir/manifest.json`.
WaterfallReport run_waterfall_dir(const std::filesystem::path& dir, const OracleConfig& cfg);

}  // namespace wlec
