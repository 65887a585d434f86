#pragma once

// Single-rewrite proof chains from the e-graph's explanations, assembled into
// a waterfall of independent equivalence obligations.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlec/egraph.hpp"
#include "wlec/extract.hpp"
#include "wlec/rewrites.hpp"

namespace wlec {

enum class StepKind : uint8_t {
  Rule,          // a catalogue or user rule
  WidthReduce,   // op(w) -> ext(w, op(w')) justified by the interval analysis
  WidthRelabel,  // an exact operand relabelled to its exact width
};
std::string_view to_string(StepKind k);

struct RewriteStep {
  StepKind kind = StepKind::Rule;
  std::string rule;
  std::map<std::string, int64_t> params;
  /// False when the rule was used right to left.
  bool forward = true;
  Position position;
  TermPtr before;
  TermPtr after;
  CheckerHint hint = CheckerHint::Simulation;
};

/// Steps turning `a` into `b`. Both must already be represented in one class.
std::vector<RewriteStep> explain_terms(EGraph& g, const TermPtr& a, const TermPtr& b,
                                       const std::vector<Rule>& rules);

struct Obligation {
  enum class Kind : uint8_t { Step, Center, AssumeGuarantee };
  Kind kind = Kind::Step;
  std::string chain;  // "spec", "impl" or "center"
  std::string rule;
  CheckerHint hint = CheckerHint::Simulation;
  TermPtr left;
  TermPtr right;
  std::vector<size_t> premises;  // assume-guarantee only
};
std::string_view to_string(Obligation::Kind k);

struct Waterfall {
  Design spec;
  Design impl;
  TermPtr spec_star;
  TermPtr impl_star;
  std::vector<RewriteStep> spec_steps;  // S -> S*
  std::vector<RewriteStep> impl_steps;  // I* -> I

  bool has_center() const { return !terms_equal(spec_star, impl_star); }
  std::vector<TermPtr> spec_chain() const;  // S, S1, ..., S*
  std::vector<TermPtr> impl_chain() const;  // I*, ..., I1, I
  /// Spec steps, the center (if any), impl steps, then the assume-guarantee lemma.
  std::vector<Obligation> obligations() const;
};

Waterfall build_waterfall(EGraph& g, const Design& spec, const Design& impl, const ExtractionResult& x,
                          const std::vector<Rule>& rules);

/// Splits every width-sensitive rule step into a relabel hop plus the rule
/// step on operands carrying their exact widths.
Waterfall insert_width_normalization_steps(const Waterfall& w, const std::vector<Rule>& rules);

/// Structural check of one step; returns a description of the problem.
std::optional<std::string> check_step(const RewriteStep& s, const std::vector<Rule>& rules);
/// Every problem across both chains, with chain endpoints checked too.
std::vector<std::string> check_adjacency(const Waterfall& w, const std::vector<Rule>& rules);

/// Writes `steps/NNN_<chain>_<rule>.sv` and `.ir` for every design and a
/// `manifest.json` listing the obligations. Returns the manifest.
nlohmann::json write_waterfall(const Waterfall& w, const std::filesystem::path& dir);

}  // namespace wlec
