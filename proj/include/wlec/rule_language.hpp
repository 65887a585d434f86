#pragma once

// Textual rewrite rules:
//
//   id : LHS => RHS if COND with HINT... ;
//
// Patterns use the IR's S-expression shape. In width/signage/constant slots
// `?w` is a parameter, a literal, or (right-hand side only) `[EXPR]`; in term
// slots `?a` binds an e-class. COND and EXPR share one small integer language.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wlec/ir.hpp"

namespace wlec {

class RuleSyntaxError : public Error {
 public:
  using Error::Error;
};

/// Raised while evaluating an expression (overflow, bad width, unknown name).
class EvalError : public Error {
 public:
  using Error::Error;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind : uint8_t { Num, Param, Call, Unary, Binary };
  Kind kind = Kind::Num;
  Wide num = 0;
  std::string name;  // parameter, function, class variable or operator
  std::optional<OpSpec> opcode;  // first argument of ew/es/nt
  std::vector<ExprPtr> args;
};

/// What the evaluator needs from a match: parameters and class facts.
struct ExprContext {
  const std::map<std::string, int64_t>* params = nullptr;
  /// Annotation and range of the class bound to a term variable.
  std::function<std::pair<Annotation, Range>(const std::string&)> class_info;
};

Wide eval_expr(const Expr& e, const ExprContext& ctx);
std::string format_expr(const Expr& e);
/// True when the expression reads the annotation or range of `var`'s class.
bool mentions_class(const Expr& e, const std::string& var);

struct Slot {
  enum class Kind : uint8_t { Lit, Param, Computed };
  Kind kind = Kind::Lit;
  int64_t lit = 0;
  std::string param;
  ExprPtr expr;
};

struct Pattern {
  enum class Kind : uint8_t { ClassVar, Const, Op };
  Kind kind = Kind::Op;
  std::string var;
  Opcode op = Opcode::Add;
  Slot hi, lo;
  Slot out_width, out_sign;
  Slot value;
  std::vector<Slot> operand_width, operand_sign;
  std::vector<Pattern> children;
};

enum class CheckerHint : uint8_t { Trivial, Simulation, ExternalStrong };
std::string_view to_string(CheckerHint h);

struct Rule {
  std::string id;
  Pattern lhs;
  Pattern rhs;
  ExprPtr cond;  // null means always
  CheckerHint hint = CheckerHint::Simulation;
  /// Rules marked `manual` are left out of default saturation.
  bool saturate = true;
  std::string text;
};

std::vector<Rule> parse_rules(std::string_view text);
Rule parse_rule(std::string_view text);
std::string format_pattern(const Pattern& p);

/// Parameters in left-hand-side order, each with the role of its first slot.
/// A constant's annotation parameters come before its value parameter.
enum class ParamRole : uint8_t { Width, ShiftWidth, Sign, ConstValue, SliceIndex };
struct ParamUse {
  std::string name;
  ParamRole role;
  Slot const_width;  // ConstValue only: the constant's own annotation
  Slot const_sign;
};
std::vector<ParamUse> lhs_parameters(const Pattern& lhs);
std::vector<std::string> class_variables(const Pattern& p);

}  // namespace wlec
