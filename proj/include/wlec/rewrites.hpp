#pragma once

// Conditional, width-parameterized rewrite rules: the built-in catalogue,
// e-graph matching and application, term-level matching for proofs, and an
// exhaustive soundness audit.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wlec/egraph.hpp"
#include "wlec/rule_language.hpp"

namespace wlec {

struct Subst {
  std::map<std::string, Id> classes;
  std::map<std::string, int64_t> params;
};

struct Match {
  size_t rule = 0;  // index into the rule list used for matching
  Id eclass = 0;
  Subst subst;
};

/// Source text of the built-in rules (same syntax as user rule files).
const std::string& catalogue_text();
const std::vector<Rule>& catalogue();
/// Catalogue rules that take part in saturation by default.
std::vector<Rule> default_rules();
const Rule* find_rule(const std::vector<Rule>& rules, const std::string& id);

/// All substitutions under which `r.lhs` matches a class of `g` and the
/// condition holds. Deterministic order.
std::vector<Match> match_rule(const EGraph& g, const Rule& r, size_t rule_index = 0);

enum class ApplyOutcome : uint8_t { Merged, AlreadyEqual, Failed };

/// Instantiates both sides and unions them, justified by the rule.
ApplyOutcome apply_match(EGraph& g, const Rule& r, const Match& m);

/// Term-level matching: binds term variables to subterms.
struct TermSubst {
  std::map<std::string, TermPtr> vars;
  std::map<std::string, int64_t> params;
};
std::optional<TermSubst> match_term(const Rule& r, const TermPtr& t);
/// Structural match only; the rule condition is not evaluated.
std::optional<TermSubst> match_pattern(const Pattern& p, const TermPtr& t);
/// Instantiates a pattern; throws EvalError/IrError when a slot is invalid.
TermPtr instantiate(const Pattern& p, const TermSubst& s);
/// Rewrites `t` at its root with `r` (left to right) when the rule applies.
std::optional<TermPtr> rewrite_root(const Rule& r, const TermPtr& t);

struct Violation {
  std::map<std::string, int64_t> params;
  std::vector<std::pair<std::string, int64_t>> inputs;
  std::string lhs;
  std::string rhs;
  int64_t lhs_value = 0;
  int64_t rhs_value = 0;
  std::string reason;
};

struct ValidationOptions {
  uint32_t max_width = 4;
  uint32_t max_shift_width = 3;
  size_t max_violations = 8;
};

/// Exhaustive audit: for every parameter vector within the width bounds whose
/// condition holds, both sides must agree on every input.
std::vector<Violation> validate_rule(const Rule& r, const ValidationOptions& opt = {});

}  // namespace wlec
