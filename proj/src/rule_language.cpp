#include "wlec/rule_language.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <fmt/format.h>

namespace wlec {

namespace {

constexpr Wide kExprLimit = Wide{1} << 100;

struct RTok {
  enum class K { Punct, Word, Int, Param, End };
  K kind;
  std::string text;
  int line;
  int column;
};

std::vector<RTok> rule_lex(std::string_view s) {
  static const char* kMulti[] = {">>>", "=>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>"};
  std::vector<RTok> out;
  int line = 1;
  int col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
    } else if (c == '#') {
      while (i < s.size() && s[i] != '\n') adv(1);
    } else if (c == '?') {
      size_t j = i + 1;
      while (j < s.size() && word_char(s[j])) ++j;
      if (j == i + 1) throw RuleSyntaxError(fmt::format("empty variable name at {}:{}", line, col));
      out.push_back({RTok::K::Param, std::string(s.substr(i + 1, j - i - 1)), line, col});
      adv(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({RTok::K::Int, std::string(s.substr(i, j - i)), line, col});
      adv(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() &&
             (word_char(s[j]) || (s[j] == '-' && j + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[j + 1]))))) {
        ++j;
      }
      out.push_back({RTok::K::Word, std::string(s.substr(i, j - i)), line, col});
      adv(j - i);
    } else {
      bool matched = false;
      for (const char* m : kMulti) {
        std::string_view mv(m);
        if (s.substr(i, mv.size()) == mv) {
          out.push_back({RTok::K::Punct, std::string(mv), line, col});
          adv(mv.size());
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string_view("()[]:;,+-*^~<>!=&|").find(c) == std::string_view::npos) {
        throw RuleSyntaxError(fmt::format("unexpected character '{}' at {}:{}", c, line, col));
      }
      out.push_back({RTok::K::Punct, std::string(1, c), line, col});
      adv(1);
    }
  }
  out.push_back({RTok::K::End, "", line, col});
  return out;
}

enum class SlotKind { Width, Sign, Value, Index };

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text), toks_(rule_lex(text)) {}

  bool done() const { return peek().kind == RTok::K::End; }

  Rule rule() {
    size_t start_tok = pos_;
    Rule r;
    if (peek().kind != RTok::K::Word) fail("expected a rule id");
    r.id = next().text;
    expect(":");
    r.lhs = pattern(true);
    expect("=>");
    r.rhs = pattern(false);
    if (accept_word("if")) r.cond = expr();
    if (accept_word("with")) {
      while (peek().kind == RTok::K::Word) {
        std::string h = next().text;
        if (h == "trivial") r.hint = CheckerHint::Trivial;
        else if (h == "simulation") r.hint = CheckerHint::Simulation;
        else if (h == "external-strong") r.hint = CheckerHint::ExternalStrong;
        else if (h == "manual") r.saturate = false;
        else fail(fmt::format("unknown rule attribute '{}'", h));
      }
    }
    expect(";");
    r.text = source_between(start_tok, pos_);
    check(r);
    return r;
  }

  ExprPtr expr() { return parse_or(); }

 private:
  std::string_view text_;
  std::vector<RTok> toks_;
  size_t pos_ = 0;

  const RTok& peek() const { return toks_[pos_]; }
  RTok next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const RTok& t = peek();
    throw RuleSyntaxError(fmt::format("{} at {}:{} (found '{}')", msg, t.line, t.column, t.text));
  }

  bool accept(std::string_view p) {
    if (peek().kind == RTok::K::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail(fmt::format("expected '{}'", p));
  }
  bool accept_word(std::string_view w) {
    if (peek().kind == RTok::K::Word && peek().text == w) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string source_between(size_t a, size_t b) const {
    // Reconstruct from tokens; exact spacing is not preserved.
    std::string s;
    for (size_t i = a; i < b; ++i) {
      const RTok& t = toks_[i];
      if (!s.empty()) s += ' ';
      s += t.kind == RTok::K::Param ? "?" + t.text : t.text;
    }
    return s;
  }

  int64_t integer_token() {
    bool neg = accept("-");
    if (peek().kind != RTok::K::Int) fail("expected an integer");
    std::string t = next().text;
    int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) fail("integer out of range");
    return neg ? -v : v;
  }

  Slot slot(SlotKind kind, bool lhs) {
    Slot s;
    if (peek().kind == RTok::K::Param) {
      s.kind = Slot::Kind::Param;
      s.param = next().text;
      return s;
    }
    if (accept("[")) {
      if (lhs) fail("computed slots are only allowed on the right-hand side");
      s.kind = Slot::Kind::Computed;
      s.expr = expr();
      expect("]");
      return s;
    }
    if (kind == SlotKind::Sign) {
      if (accept_word("unsigned")) return s;
      if (accept_word("signed")) {
        s.lit = 1;
        return s;
      }
      fail("expected signage");
    }
    s.lit = integer_token();
    return s;
  }

  Pattern pattern(bool lhs) {
    Pattern p;
    if (peek().kind == RTok::K::Param) {
      p.kind = Pattern::Kind::ClassVar;
      p.var = next().text;
      return p;
    }
    expect("(");
    RTok head = next();
    if (head.kind == RTok::K::Word && head.text == "const") {
      p.kind = Pattern::Kind::Const;
      p.value = slot(SlotKind::Value, lhs);
      p.out_width = slot(SlotKind::Width, lhs);
      p.out_sign = slot(SlotKind::Sign, lhs);
      expect(")");
      return p;
    }
    auto op = opcode_from_string(head.text);
    if (!op) {
      --pos_;
      fail("expected an operator, 'const' or a variable");
    }
    p.kind = Pattern::Kind::Op;
    p.op = *op;
    p.out_width = slot(SlotKind::Width, lhs);
    p.out_sign = slot(SlotKind::Sign, lhs);
    if (p.op == Opcode::Slice) {
      p.hi = slot(SlotKind::Index, lhs);
      p.lo = slot(SlotKind::Index, lhs);
    }
    while (!accept(")")) {
      p.operand_width.push_back(slot(SlotKind::Width, lhs));
      p.operand_sign.push_back(slot(SlotKind::Sign, lhs));
      p.children.push_back(pattern(lhs));
    }
    if (p.children.size() != arity(p.op)) {
      throw RuleSyntaxError(fmt::format("'{}' expects {} operands, got {} at {}:{}", to_string(p.op), arity(p.op),
                                        p.children.size(), head.line, head.column));
    }
    return p;
  }

  // ---- expressions ----

  ExprPtr binary(std::string op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->name = std::move(op);
    e->args = {std::move(a), std::move(b)};
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr a = parse_and();
    while (accept("||")) a = binary("||", a, parse_and());
    return a;
  }
  ExprPtr parse_and() {
    ExprPtr a = parse_not();
    while (accept("&&")) a = binary("&&", a, parse_not());
    return a;
  }
  ExprPtr parse_not() {
    if (accept("!")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Unary;
      e->name = "!";
      e->args = {parse_not()};
      return e;
    }
    return parse_cmp();
  }
  ExprPtr parse_cmp() {
    ExprPtr a = parse_sum();
    for (const char* op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (accept(op)) return binary(op, a, parse_sum());
    }
    return a;
  }
  ExprPtr parse_sum() {
    ExprPtr a = parse_prod();
    while (true) {
      if (accept("+")) a = binary("+", a, parse_prod());
      else if (accept("-")) a = binary("-", a, parse_prod());
      else return a;
    }
  }
  ExprPtr parse_prod() {
    ExprPtr a = parse_pow();
    while (accept("*")) a = binary("*", a, parse_pow());
    return a;
  }
  ExprPtr parse_pow() {
    ExprPtr a = parse_unary();
    if (accept("^")) return binary("^", a, parse_pow());
    return a;
  }
  ExprPtr parse_unary() {
    if (accept("-")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Unary;
      e->name = "-";
      e->args = {parse_unary()};
      return e;
    }
    return parse_atom();
  }
  ExprPtr parse_atom() {
    auto e = std::make_shared<Expr>();
    if (accept("(")) {
      ExprPtr inner = parse_or();
      expect(")");
      return inner;
    }
    if (peek().kind == RTok::K::Int) {
      e->kind = Expr::Kind::Num;
      e->num = integer_token();
      return e;
    }
    if (peek().kind == RTok::K::Param) {
      e->kind = Expr::Kind::Param;
      e->name = next().text;
      return e;
    }
    if (peek().kind != RTok::K::Word) fail("expected an expression");
    std::string w = next().text;
    if (w == "unsigned" || w == "false") return e;
    if (w == "signed" || w == "true") {
      e->num = 1;
      return e;
    }
    e->kind = Expr::Kind::Call;
    e->name = w;
    expect("(");
    if (w == "ew" || w == "es" || w == "nt") {
      RTok t = next();
      auto op = opcode_from_string(t.text);
      if (!op) {
        --pos_;
        fail(fmt::format("'{}' needs an operator as its first argument", w));
      }
      e->opcode = OpSpec{*op, 0, 0};
      if (!accept(",")) {
        expect(")");
        return e;
      }
    }
    if (!accept(")")) {
      do {
        e->args.push_back(parse_or());
      } while (accept(","));
      expect(")");
    }
    return e;
  }

  // ---- static checks ----

  static void collect(const Pattern& p, std::set<std::string>& params, std::set<std::string>& vars) {
    auto slot_param = [&](const Slot& s) {
      if (s.kind == Slot::Kind::Param) params.insert(s.param);
    };
    if (p.kind == Pattern::Kind::ClassVar) {
      vars.insert(p.var);
      return;
    }
    slot_param(p.out_width);
    slot_param(p.out_sign);
    slot_param(p.value);
    slot_param(p.hi);
    slot_param(p.lo);
    for (const auto& s : p.operand_width) slot_param(s);
    for (const auto& s : p.operand_sign) slot_param(s);
    for (const auto& c : p.children) collect(c, params, vars);
  }

  static void expr_names(const Expr& e, std::set<std::string>& params, std::set<std::string>& vars) {
    if (e.kind == Expr::Kind::Param) params.insert(e.name);
    if (e.kind == Expr::Kind::Call && (e.name == "cw" || e.name == "cs" || e.name == "clo" || e.name == "chi")) {
      if (e.args.size() != 1 || e.args[0]->kind != Expr::Kind::Param) {
        throw RuleSyntaxError(fmt::format("{}() takes one term variable", e.name));
      }
      vars.insert(e.args[0]->name);
      return;
    }
    for (const auto& a : e.args) expr_names(*a, params, vars);
  }

  static void rhs_exprs(const Pattern& p, std::vector<ExprPtr>& out) {
    auto add = [&](const Slot& s) {
      if (s.kind == Slot::Kind::Computed) out.push_back(s.expr);
    };
    if (p.kind == Pattern::Kind::ClassVar) return;
    add(p.out_width);
    add(p.out_sign);
    add(p.value);
    add(p.hi);
    add(p.lo);
    for (const auto& s : p.operand_width) add(s);
    for (const auto& s : p.operand_sign) add(s);
    for (const auto& c : p.children) rhs_exprs(c, out);
  }

  void check(const Rule& r) const {
    auto err = [&](const std::string& m) { throw RuleSyntaxError(fmt::format("rule '{}': {}", r.id, m)); };
    if (r.lhs.kind == Pattern::Kind::ClassVar) err("left-hand side must be an operator pattern");
    std::set<std::string> lp, lv, rp, rv;
    collect(r.lhs, lp, lv);
    collect(r.rhs, rp, rv);
    std::vector<ExprPtr> exprs;
    rhs_exprs(r.rhs, exprs);
    if (r.cond) exprs.push_back(r.cond);
    for (const auto& e : exprs) expr_names(*e, rp, rv);
    for (const auto& n : lp) {
      if (lv.count(n)) err(fmt::format("'?{}' is used both as a parameter and as a term variable", n));
    }
    for (const auto& n : rp) {
      if (!lp.count(n)) err(fmt::format("parameter '?{}' is not bound by the left-hand side", n));
    }
    for (const auto& n : rv) {
      if (!lv.count(n)) err(fmt::format("term variable '?{}' is not bound by the left-hand side", n));
    }
  }
};

Wide checked(Wide v) {
  if (v >= kExprLimit || v <= -kExprLimit) throw EvalError("expression overflow");
  return v;
}

uint32_t as_width(Wide v) {
  if (v < 1 || v > kMaxWidth) throw EvalError(fmt::format("width {} out of range", static_cast<int64_t>(v)));
  return static_cast<uint32_t>(v);
}

Signage as_sign(Wide v) {
  if (v != 0 && v != 1) throw EvalError("signage must be 0 or 1");
  return v ? Signage::Signed : Signage::Unsigned;
}

void format_slot(std::string& s, const Slot& sl, bool sign) {
  switch (sl.kind) {
    case Slot::Kind::Lit:
      s += sign ? std::string(sl.lit ? "signed" : "unsigned") : std::to_string(sl.lit);
      break;
    case Slot::Kind::Param:
      s += "?" + sl.param;
      break;
    case Slot::Kind::Computed:
      s += "[" + format_expr(*sl.expr) + "]";
      break;
  }
}

}  // namespace

std::string_view to_string(CheckerHint h) {
  switch (h) {
    case CheckerHint::Trivial:
      return "trivial";
    case CheckerHint::Simulation:
      return "simulation";
    case CheckerHint::ExternalStrong:
      return "external-strong";
  }
  return "simulation";
}

Wide eval_expr(const Expr& e, const ExprContext& ctx) {
  auto arg = [&](size_t i) { return eval_expr(*e.args.at(i), ctx); };
  switch (e.kind) {
    case Expr::Kind::Num:
      return e.num;
    case Expr::Kind::Param: {
      if (!ctx.params) throw EvalError(fmt::format("unbound parameter '?{}'", e.name));
      auto it = ctx.params->find(e.name);
      if (it == ctx.params->end()) throw EvalError(fmt::format("unbound parameter '?{}'", e.name));
      return it->second;
    }
    case Expr::Kind::Unary:
      if (e.name == "!") return arg(0) == 0;
      return checked(-arg(0));
    case Expr::Kind::Binary: {
      const std::string& op = e.name;
      if (op == "&&") return arg(0) != 0 && arg(1) != 0;
      if (op == "||") return arg(0) != 0 || arg(1) != 0;
      Wide a = arg(0);
      Wide b = arg(1);
      if (op == "+") return checked(a + b);
      if (op == "-") return checked(a - b);
      if (op == "*") {
        if (a != 0 && (b >= kExprLimit / (a < 0 ? -a : a) || b <= -kExprLimit / (a < 0 ? -a : a))) {
          throw EvalError("expression overflow");
        }
        return checked(a * b);
      }
      if (op == "^") {
        if (b < 0 || b > 99) throw EvalError("exponent out of range");
        Wide r = 1;
        for (Wide k = 0; k < b; ++k) r = checked(r * a);
        return r;
      }
      if (op == "==") return a == b;
      if (op == "!=") return a != b;
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      if (op == ">=") return a >= b;
      throw EvalError(fmt::format("unknown operator '{}'", op));
    }
    case Expr::Kind::Call:
      break;
  }
  const std::string& f = e.name;
  auto need = [&](size_t n) {
    if (e.args.size() != n) throw EvalError(fmt::format("{}() takes {} arguments", f, n));
  };
  if (f == "min" || f == "max") {
    need(2);
    return f == "min" ? std::min(arg(0), arg(1)) : std::max(arg(0), arg(1));
  }
  if (f == "fits") {
    need(4);
    Annotation a{as_width(arg(2)), as_sign(arg(3))};
    return arg(0) <= arg(1) && representable(arg(0), a) && representable(arg(1), a);
  }
  if (f == "log2") {
    need(1);
    Wide v = arg(0);
    if (v <= 0) throw EvalError("log2 of a non-positive value");
    Wide r = 0;
    while (v > 1) {
      v >>= 1;
      ++r;
    }
    return r;
  }
  if (f == "ispow2") {
    need(1);
    Wide v = arg(0);
    return v > 0 && (v & (v - 1)) == 0;
  }
  if (f == "bits") {
    need(1);
    Wide v = arg(0);
    if (v < 0) throw EvalError("bits of a negative value");
    Wide r = 1;
    while (v >= (Wide{1} << r)) ++r;
    return r;
  }
  if (f == "upat") {
    need(2);
    Wide v = arg(0);
    uint32_t w = as_width(arg(1));
    Wide m = Wide{1} << w;
    return ((v % m) + m) % m;
  }
  if (f == "shamt") {
    // Shift amount seen by a shift whose amount operand is (w, any) and whose
    // operand term is a constant v of annotation (wc, sc).
    need(4);
    Annotation from{as_width(arg(1)), as_sign(arg(2))};
    Annotation to{as_width(arg(3)), Signage::Unsigned};
    Wide v = arg(0);
    if (!representable(v, from)) throw EvalError("shamt: value not representable in its annotation");
    return coerce(static_cast<int64_t>(v), from, to);
  }
  if (f == "coerce") {
    need(5);
    Annotation from{as_width(arg(1)), as_sign(arg(2))};
    Annotation to{as_width(arg(3)), as_sign(arg(4))};
    Wide v = arg(0);
    if (!representable(v, from)) throw EvalError("coerce: value not representable in its annotation");
    return coerce(static_cast<int64_t>(v), from, to);
  }
  if (f == "ew" || f == "es" || f == "nt") {
    if (!e.opcode) throw EvalError(fmt::format("{}() needs an operator", f));
    size_t n = arity(e.opcode->op);
    size_t skip = f == "nt" ? 2 : 0;
    if (e.args.size() != skip + 2 * n) throw EvalError(fmt::format("{}() has the wrong number of arguments", f));
    std::vector<Annotation> ops;
    for (size_t i = 0; i < n; ++i) ops.push_back({as_width(arg(skip + 2 * i)), as_sign(arg(skip + 2 * i + 1))});
    if (f == "nt") {
      Annotation out{as_width(arg(0)), as_sign(arg(1))};
      std::vector<Range> full;
      for (const auto& a : ops) full.push_back(full_range(a));
      auto r = exact_range(*e.opcode, ops, full);
      return r && representable(r->lo, out) && representable(r->hi, out);
    }
    Annotation x = exact_width(*e.opcode, ops);
    return f == "ew" ? Wide{x.width} : Wide{x.is_signed() ? 1 : 0};
  }
  if (f == "cw" || f == "cs" || f == "clo" || f == "chi") {
    need(1);
    if (!ctx.class_info) throw EvalError(fmt::format("{}() needs class information", f));
    auto [ann, range] = ctx.class_info(e.args[0]->name);
    if (f == "cw") return ann.width;
    if (f == "cs") return ann.is_signed() ? 1 : 0;
    return f == "clo" ? range.lo : range.hi;
  }
  throw EvalError(fmt::format("unknown function '{}'", f));
}

std::string format_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Num: {
      return std::to_string(static_cast<int64_t>(e.num));
    }
    case Expr::Kind::Param:
      return "?" + e.name;
    case Expr::Kind::Unary:
      return e.name + format_expr(*e.args[0]);
    case Expr::Kind::Binary:
      return "(" + format_expr(*e.args[0]) + " " + e.name + " " + format_expr(*e.args[1]) + ")";
    case Expr::Kind::Call: {
      std::string s = e.name + "(";
      bool first = true;
      if (e.opcode) {
        s += to_string(e.opcode->op);
        first = false;
      }
      for (const auto& a : e.args) {
        if (!first) s += ", ";
        s += format_expr(*a);
        first = false;
      }
      return s + ")";
    }
  }
  return "";
}

bool mentions_class(const Expr& e, const std::string& var) {
  if (e.kind == Expr::Kind::Call && (e.name == "cw" || e.name == "cs" || e.name == "clo" || e.name == "chi")) {
    return !e.args.empty() && e.args[0]->name == var;
  }
  return std::any_of(e.args.begin(), e.args.end(), [&](const ExprPtr& a) { return mentions_class(*a, var); });
}

std::string format_pattern(const Pattern& p) {
  if (p.kind == Pattern::Kind::ClassVar) return "?" + p.var;
  std::string s = "(";
  if (p.kind == Pattern::Kind::Const) {
    s += "const ";
    format_slot(s, p.value, false);
    s += " ";
    format_slot(s, p.out_width, false);
    s += " ";
    format_slot(s, p.out_sign, true);
    return s + ")";
  }
  s += to_string(p.op);
  s += " ";
  format_slot(s, p.out_width, false);
  s += " ";
  format_slot(s, p.out_sign, true);
  if (p.op == Opcode::Slice) {
    s += " ";
    format_slot(s, p.hi, false);
    s += " ";
    format_slot(s, p.lo, false);
  }
  for (size_t i = 0; i < p.children.size(); ++i) {
    s += " ";
    format_slot(s, p.operand_width[i], false);
    s += " ";
    format_slot(s, p.operand_sign[i], true);
    s += " " + format_pattern(p.children[i]);
  }
  return s + ")";
}

std::vector<Rule> parse_rules(std::string_view text) {
  RuleParser p(text);
  std::vector<Rule> out;
  std::set<std::string> ids;
  while (!p.done()) {
    Rule r = p.rule();
    if (!ids.insert(r.id).second) throw RuleSyntaxError(fmt::format("duplicate rule id '{}'", r.id));
    out.push_back(std::move(r));
  }
  return out;
}

Rule parse_rule(std::string_view text) {
  auto rules = parse_rules(text);
  if (rules.size() != 1) throw RuleSyntaxError(fmt::format("expected one rule, found {}", rules.size()));
  return rules.front();
}

std::vector<ParamUse> lhs_parameters(const Pattern& lhs) {
  std::vector<ParamUse> out;
  std::set<std::string> seen;
  auto use = [&](const Slot& s, ParamRole role, const Pattern* owner = nullptr) {
    if (s.kind != Slot::Kind::Param || !seen.insert(s.param).second) return;
    ParamUse u{s.param, role, {}, {}};
    if (owner) {
      u.const_width = owner->out_width;
      u.const_sign = owner->out_sign;
    }
    out.push_back(std::move(u));
  };
  std::function<void(const Pattern&)> go = [&](const Pattern& p) {
    if (p.kind == Pattern::Kind::ClassVar) return;
    use(p.out_width, ParamRole::Width);
    use(p.out_sign, ParamRole::Sign);
    if (p.kind == Pattern::Kind::Const) {
      use(p.value, ParamRole::ConstValue, &p);
      return;
    }
    if (p.op == Opcode::Slice) {
      use(p.hi, ParamRole::SliceIndex);
      use(p.lo, ParamRole::SliceIndex);
    }
    for (size_t i = 0; i < p.children.size(); ++i) {
      use(p.operand_width[i], is_shift(p.op) && i == 1 ? ParamRole::ShiftWidth : ParamRole::Width);
      use(p.operand_sign[i], ParamRole::Sign);
      go(p.children[i]);
    }
  };
  go(lhs);
  return out;
}

std::vector<std::string> class_variables(const Pattern& p) {
  std::vector<std::string> out;
  std::function<void(const Pattern&)> go = [&](const Pattern& q) {
    if (q.kind == Pattern::Kind::ClassVar) {
      if (std::find(out.begin(), out.end(), q.var) == out.end()) out.push_back(q.var);
      return;
    }
    for (const auto& c : q.children) go(c);
  };
  go(p);
  return out;
}

}  // namespace wlec
