#pragma once

// Word-level term language: annotations, terms, bit-precise evaluation and
// width arithmetic.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wlec {

/// Widest annotation a term may carry. Every representable value fits in an
/// int64_t, and every exact product of two operands fits in __int128.
inline constexpr uint32_t kMaxWidth = 63;

using Wide = __int128;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IrError : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

enum class Signage : uint8_t { Unsigned, Signed };

std::string_view to_string(Signage s);
std::optional<Signage> signage_from_string(std::string_view s);

struct Annotation {
  uint32_t width = 1;
  Signage sign = Signage::Unsigned;

  bool is_signed() const { return sign == Signage::Signed; }
  friend auto operator<=>(const Annotation&, const Annotation&) = default;
};

inline Annotation unsigned_of(uint32_t w) { return {w, Signage::Unsigned}; }
inline Annotation signed_of(uint32_t w) { return {w, Signage::Signed}; }

// Requires 1 <= a.width <= kMaxWidth.
int64_t min_value(Annotation a);
int64_t max_value(Annotation a);
bool representable(Wide v, Annotation a);
bool valid_annotation(Annotation a);

/// Smallest annotation whose range contains [lo, hi]. Unsigned when lo >= 0.
Annotation min_annotation(Wide lo, Wide hi);

enum class Opcode : uint8_t {
  Add, Sub, Mul, Neg, Shl, Shr, Sra, And, Or, Xor, Not,
  Mux, Concat, Slice, Eq, Lt, Zext, Sext,
};

inline constexpr Opcode kAllOpcodes[] = {
    Opcode::Add, Opcode::Sub, Opcode::Mul,    Opcode::Neg,   Opcode::Shl,
    Opcode::Shr, Opcode::Sra, Opcode::And,    Opcode::Or,    Opcode::Xor,
    Opcode::Not, Opcode::Mux, Opcode::Concat, Opcode::Slice, Opcode::Eq,
    Opcode::Lt,  Opcode::Zext, Opcode::Sext,
};

std::string_view to_string(Opcode op);
std::optional<Opcode> opcode_from_string(std::string_view s);
size_t arity(Opcode op);
bool is_shift(Opcode op);

/// Opcode plus the structural literals it carries (slice indices).
struct OpSpec {
  Opcode op = Opcode::Add;
  uint32_t hi = 0;
  uint32_t lo = 0;

  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

enum class TermKind : uint8_t { Var, Const, Op };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Operand {
  Annotation ann;
  TermPtr term;
};

/// Immutable expression tree node. Subtrees may be shared between terms.
struct Term {
  TermKind kind = TermKind::Var;
  Annotation out;
  std::string name;       // Var
  int64_t value = 0;      // Const
  OpSpec spec;            // Op
  std::vector<Operand> operands;

  bool is_var() const { return kind == TermKind::Var; }
  bool is_const() const { return kind == TermKind::Const; }
  bool is_op() const { return kind == TermKind::Op; }
};

TermPtr make_var(std::string name, Annotation out);
TermPtr make_const(int64_t value, Annotation out);
TermPtr make_op(OpSpec spec, Annotation out, std::vector<Operand> operands);
inline TermPtr make_op(Opcode op, Annotation out, std::vector<Operand> operands) {
  return make_op(OpSpec{op, 0, 0}, out, std::move(operands));
}

/// Structural equality including every annotation.
bool terms_equal(const TermPtr& a, const TermPtr& b);
size_t term_hash(const TermPtr& t);
/// Number of nodes in the tree view (shared subtrees counted per use).
uint64_t tree_size(const TermPtr& t);
/// Number of distinct structural subterms.
size_t dag_size(const TermPtr& t);
std::vector<std::string> free_variables(const TermPtr& t);

/// Canonical S-expression text, e.g. `(+ 9 unsigned 8 unsigned (var a 8 unsigned) ...)`.
std::string format_term(const TermPtr& t);

/// A position is the path of operand indices from the root.
using Position = std::vector<uint32_t>;

TermPtr subterm_at(const TermPtr& t, const Position& pos);
TermPtr replace_at(const TermPtr& t, const Position& pos, TermPtr replacement);
std::string format_position(const Position& pos);

class Environment {
 public:
  void bind(const std::string& name, Annotation ann, int64_t value);
  const std::pair<Annotation, int64_t>* find(const std::string& name) const;
  const std::map<std::string, std::pair<Annotation, int64_t>>& bindings() const {
    return bindings_;
  }

 private:
  std::map<std::string, std::pair<Annotation, int64_t>> bindings_;
};

/// Reinterprets `value` (representable in `from`) as a value of `to`:
/// sign- or zero-extends per `from`, or truncates to the low bits.
int64_t coerce(int64_t value, Annotation from, Annotation to);

/// Truncates a 64-bit two's-complement pattern to `a` and reinterprets it.
int64_t wrap_pattern(uint64_t pattern, Annotation a);

/// Applies one operator to already-coerced operand values. `ops` are the
/// operand annotations; `args` hold values representable in them.
int64_t apply_op(const OpSpec& spec, Annotation out, std::span<const Annotation> ops,
                 std::span<const int64_t> args);

int64_t evaluate(const TermPtr& t, const Environment& env);

/// Smallest output annotation for which `apply_op` never truncates.
Annotation exact_width(const OpSpec& spec, std::span<const Annotation> ops);
inline Annotation exact_width(Opcode op, std::span<const Annotation> ops) {
  return exact_width(OpSpec{op, 0, 0}, ops);
}

/// Exact integer range of an operator result over all operand values in the
/// given ranges; nullopt when it exceeds what __int128 can hold.
struct Range {
  Wide lo;
  Wide hi;
};
std::optional<Range> exact_range(const OpSpec& spec, std::span<const Annotation> ops,
                                 std::span<const Range> args);
Range full_range(Annotation a);

/// A term flattened to a post-order program for repeated evaluation.
/// Input slots follow the order of `inputs` given at construction.
class CompiledTerm {
 public:
  CompiledTerm(const TermPtr& t, std::span<const std::string> inputs);
  int64_t eval(std::span<const int64_t> inputs) const;

 private:
  struct Instr {
    TermKind kind;
    OpSpec spec;
    Annotation out;
    int64_t value;  // const value or input slot
    uint32_t first_arg;
    uint32_t nargs;
  };
  std::vector<Instr> code_;
  std::vector<uint32_t> arg_slots_;
  std::vector<Annotation> arg_from_;
  std::vector<Annotation> arg_to_;
  mutable std::vector<int64_t> scratch_;
};

}  // namespace wlec
