// Reader for the combinational SystemVerilog subset. Verilog's
// context-determined sizing is resolved here, once, into explicit IR operand
// annotations; internal wires are inlined into a single term.

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "wlec/frontend.hpp"

namespace wlec {

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> lex(std::string_view src) {
  static const char* kPuncts[] = {"<<<", ">>>", "<<", ">>", "==", "!=", "<=", ">=", "&&", "||", "+:", "-:"};
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    if (src.substr(i, 2) == "/*") {
      int l = line, cl = col;
      size_t end = src.find("*/", i + 2);
      if (end == std::string_view::npos) throw ParseError("unterminated comment", l, cl);
      adv(end + 2 - i);
      continue;
    }
    if (c == '`') throw ParseError("unsupported construct: preprocessor directive", line, col);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '$')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), line, col});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      // [size]'[s]base digits, or plain decimal.
      size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      size_t k = j;
      while (k < src.size() && std::isspace(static_cast<unsigned char>(src[k]))) ++k;
      if (k < src.size() && src[k] == '\'') {
        j = k + 1;
        if (j < src.size() && (src[j] == 's' || src[j] == 'S')) ++j;
        if (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
        while (j < src.size() && std::isspace(static_cast<unsigned char>(src[j]))) ++j;
        while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '?')) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), line, col});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view ps(p);
      if (src.substr(i, ps.size()) == ps) {
        out.push_back({Tok::Punct, std::string(ps), line, col});
        adv(ps.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("()[]{},;:=+-*/%~&|^<>!?@#.").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), line, col});
      adv(1);
      continue;
    }
    throw ParseError(fmt::format("unexpected character '{}'", c), line, col);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind { Ident, Literal, Unary, Binary, Ternary, Concat, Select, Cast };

struct Expr {
  ExprKind kind;
  std::string op;  // operator text, identifier name or cast name
  int64_t value = 0;
  Annotation lit_ann;
  uint32_t hi = 0;
  uint32_t lo = 0;
  std::vector<ExprPtr> kids;
  int line = 0;
  int column = 0;
};

enum class Dir { Input, Output, Internal };

struct Signal {
  std::string name;
  Dir dir = Dir::Internal;
  Annotation ann;
  uint32_t range_lo = 0;
  bool declared = false;
  ExprPtr driver;
  int line = 0;
  int column = 0;
};

struct SelfType {
  uint32_t width;
  bool is_signed;
};

class SvParser {
 public:
  explicit SvParser(std::string_view src) : toks_(lex(src)) {}

  Design parse() {
    expect_ident("module");
    std::string name = ident();
    std::vector<std::string> header_ports;
    if (accept("#")) fail(peek(), "unsupported construct: module parameters");
    if (accept("(")) {
      if (!accept(")")) {
        if (is_direction(peek().text)) {
          parse_ansi_ports();
        } else {
          do {
            header_ports.push_back(ident());
          } while (accept(","));
          expect(")");
        }
      }
    }
    expect(";");
    while (!(peek().kind == Tok::Ident && peek().text == "endmodule")) {
      if (peek().kind == Tok::End) fail(peek(), "missing endmodule");
      parse_item();
    }
    next();
    if (peek().kind != Tok::End) {
      if (peek().text == "module") fail(peek(), "unsupported construct: multiple modules");
      fail(peek(), "trailing input after endmodule");
    }
    return elaborate(name, header_ports);
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<std::string> order_;
  std::map<std::string, Signal> signals_;
  std::map<std::string, TermPtr> resolved_;
  std::map<std::string, int> visiting_;

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(msg, t.line, t.column); }
  [[noreturn]] void fail_at(const Expr& e, const std::string& msg) const { throw ParseError(msg, e.line, e.column); }

  bool accept(std::string_view p) {
    if (peek().kind != Tok::End && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view p) {
    if (!accept(p)) fail(peek(), fmt::format("expected '{}', found '{}'", p, peek().text));
  }

  void expect_ident(std::string_view p) {
    if (peek().kind != Tok::Ident || peek().text != p) fail(peek(), fmt::format("expected '{}'", p));
    ++pos_;
  }

  std::string ident() {
    if (peek().kind != Tok::Ident) fail(peek(), fmt::format("expected identifier, found '{}'", peek().text));
    return next().text;
  }

  static bool is_direction(const std::string& s) { return s == "input" || s == "output" || s == "inout"; }

  uint32_t number_literal() {
    Token t = next();
    if (t.kind != Tok::Number) fail(t, "expected a number");
    std::string digits;
    for (char c : t.text) {
      if (c != '_') digits += c;
    }
    if (digits.find('\'') != std::string::npos) fail(t, "expected a plain integer");
    return static_cast<uint32_t>(std::stoul(digits));
  }

  // Optional `signed` and `[h:l]`; returns (annotation, range_lo).
  std::pair<Annotation, uint32_t> type_suffix(bool& is_signed) {
    if (accept("signed")) is_signed = true;
    if (accept("unsigned")) is_signed = false;
    uint32_t width = 1;
    uint32_t lo = 0;
    if (peek().text == "[") {
      Token open = next();
      uint32_t h = number_literal();
      expect(":");
      uint32_t l = number_literal();
      expect("]");
      if (h < l) fail(open, "unsupported construct: ascending range");
      width = h - l + 1;
      lo = l;
      if (peek().text == "[") fail(peek(), "unsupported construct: packed or unpacked arrays");
    }
    if (width > kMaxWidth) fail(peek(), fmt::format("width {} exceeds the supported maximum {}", width, kMaxWidth));
    return {{width, is_signed ? Signage::Signed : Signage::Unsigned}, lo};
  }

  void declare(const std::string& name, Dir dir, Annotation ann, uint32_t lo, const Token& at) {
    auto& s = signals_[name];
    if (s.declared) {
      bool port_redecl = (s.dir != Dir::Internal && dir == Dir::Internal && s.ann == ann);
      if (!port_redecl) fail(at, fmt::format("'{}' declared twice", name));
      return;
    }
    if (s.name.empty()) order_.push_back(name);
    s.name = name;
    s.dir = dir;
    s.ann = ann;
    s.range_lo = lo;
    s.declared = true;
    s.line = at.line;
    s.column = at.column;
  }

  void parse_ansi_ports() {
    Dir dir = Dir::Input;
    std::pair<Annotation, uint32_t> type{unsigned_of(1), 0};
    while (true) {
      if (is_direction(peek().text)) {
        Token d = next();
        if (d.text == "inout") fail(d, "unsupported construct: inout port");
        dir = d.text == "input" ? Dir::Input : Dir::Output;
        if (peek().text == "wire" || peek().text == "logic" || peek().text == "reg") next();
        bool sg = false;
        type = type_suffix(sg);
      }
      Token at = peek();
      std::string n = ident();
      declare(n, dir, type.first, type.second, at);
      if (accept(")")) break;
      expect(",");
    }
  }

  void parse_item() {
    Token t = peek();
    if (t.kind != Tok::Ident) fail(t, fmt::format("unexpected '{}'", t.text));
    if (is_direction(t.text)) {
      next();
      if (t.text == "inout") fail(t, "unsupported construct: inout port");
      Dir dir = t.text == "input" ? Dir::Input : Dir::Output;
      if (peek().text == "wire" || peek().text == "logic" || peek().text == "reg") next();
      bool sg = false;
      auto type = type_suffix(sg);
      do {
        Token at = peek();
        declare(ident(), dir, type.first, type.second, at);
      } while (accept(","));
      expect(";");
      return;
    }
    if (t.text == "wire" || t.text == "logic" || t.text == "reg") {
      next();
      bool sg = false;
      auto type = type_suffix(sg);
      do {
        Token at = peek();
        std::string n = ident();
        declare(n, Dir::Internal, type.first, type.second, at);
        if (accept("=")) drive(n, parse_expr(), at);
      } while (accept(","));
      expect(";");
      return;
    }
    if (t.text == "assign") {
      next();
      do {
        Token at = peek();
        std::string n = ident();
        if (peek().text == "[") fail(peek(), "unsupported construct: partial assignment");
        expect("=");
        drive(n, parse_expr(), at);
      } while (accept(","));
      expect(";");
      return;
    }
    if (t.text == "always_comb") {
      next();
      if (accept("begin")) {
        while (!accept("end")) parse_procedural_assign();
      } else {
        parse_procedural_assign();
      }
      return;
    }
    if (t.text == "always" || t.text == "always_ff" || t.text == "initial") {
      fail(t, fmt::format("unsupported construct: {} block", t.text));
    }
    if (t.text == "parameter" || t.text == "localparam") fail(t, "unsupported construct: parameter");
    if (t.text == "generate" || t.text == "genvar") fail(t, "unsupported construct: generate");
    if (t.text == "function" || t.text == "task") fail(t, fmt::format("unsupported construct: {}", t.text));
    fail(t, fmt::format("unsupported construct: '{}'", t.text));
  }

  void parse_procedural_assign() {
    Token at = peek();
    if (at.text == "if" || at.text == "case" || at.text == "for") {
      fail(at, fmt::format("unsupported construct: '{}' in always_comb", at.text));
    }
    std::string n = ident();
    if (peek().text == "<=") fail(peek(), "unsupported construct: nonblocking assignment");
    expect("=");
    drive(n, parse_expr(), at);
    expect(";");
  }

  void drive(const std::string& name, ExprPtr e, const Token& at) {
    auto it = signals_.find(name);
    if (it == signals_.end() || !it->second.declared) fail(at, fmt::format("assignment to undeclared '{}'", name));
    if (it->second.dir == Dir::Input) fail(at, fmt::format("assignment to input '{}'", name));
    if (it->second.driver) fail(at, fmt::format("'{}' is multiply driven", name));
    it->second.driver = std::move(e);
  }

  // ---- expressions (precedence climbing) ----

  ExprPtr make(ExprKind k, const Token& at, std::string op = {}) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->op = std::move(op);
    e->line = at.line;
    e->column = at.column;
    return e;
  }

  ExprPtr parse_expr() { return parse_ternary(); }

  ExprPtr parse_ternary() {
    ExprPtr c = parse_binary(0);
    if (peek().text == "?") {
      Token q = next();
      ExprPtr a = parse_ternary();
      expect(":");
      ExprPtr b = parse_ternary();
      auto e = make(ExprKind::Ternary, q, "?");
      e->kids.push_back(std::move(c));
      e->kids.push_back(std::move(a));
      e->kids.push_back(std::move(b));
      return e;
    }
    return c;
  }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>" || op == ">>>" || op == "<<<") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*") return 10;
    return -1;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    while (peek().kind == Tok::Punct) {
      std::string op = peek().text;
      int p = precedence(op);
      if (p < 0 || p < min_prec) break;
      Token at = next();
      if (op == "&&" || op == "||") fail(at, fmt::format("unsupported construct: logical operator '{}'", op));
      ExprPtr rhs = parse_binary(p + 1);
      auto e = make(ExprKind::Binary, at, op == "<<<" ? "<<" : op);
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    if (peek().text == "/" || peek().text == "%") fail(peek(), "unsupported construct: division");
    return lhs;
  }

  ExprPtr parse_unary() {
    Token t = peek();
    if (t.text == "-" || t.text == "~" || t.text == "+") {
      next();
      ExprPtr a = parse_unary();
      if (t.text == "+") return a;
      auto e = make(ExprKind::Unary, t, t.text);
      e->kids.push_back(std::move(a));
      return e;
    }
    if (t.text == "!" || t.text == "&" || t.text == "|" || t.text == "^") {
      fail(t, fmt::format("unsupported construct: unary '{}'", t.text));
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    Token t = next();
    if (t.text == "(") {
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (t.text == "{") {
      auto e = make(ExprKind::Concat, t, "{}");
      do {
        ExprPtr part = parse_expr();
        if (peek().text == "{") fail(peek(), "unsupported construct: replication");
        e->kids.push_back(std::move(part));
      } while (accept(","));
      expect("}");
      return e;
    }
    if (t.kind == Tok::Number) return literal(t);
    if (t.kind == Tok::Ident) {
      if (t.text == "$signed" || t.text == "$unsigned") {
        expect("(");
        auto e = make(ExprKind::Cast, t, t.text);
        e->kids.push_back(parse_expr());
        expect(")");
        return e;
      }
      if (t.text[0] == '$') fail(t, fmt::format("unsupported construct: system function {}", t.text));
      auto id = make(ExprKind::Ident, t, t.text);
      if (peek().text == "[") {
        next();
        uint32_t h = number_literal();
        uint32_t l = h;
        if (peek().text == "+:" || peek().text == "-:") fail(peek(), "unsupported construct: indexed part-select");
        if (accept(":")) l = number_literal();
        expect("]");
        if (h < l) fail(t, "unsupported construct: ascending part-select");
        auto s = make(ExprKind::Select, t, t.text);
        s->hi = h;
        s->lo = l;
        return s;
      }
      return id;
    }
    fail(t, fmt::format("unexpected '{}' in expression", t.text));
  }

  ExprPtr literal(const Token& t) {
    std::string s;
    for (char c : t.text) {
      if (c != '_' && !std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    auto e = make(ExprKind::Literal, t);
    size_t q = s.find('\'');
    if (q == std::string::npos) {
      unsigned long long v = std::stoull(s);
      if (v > static_cast<unsigned long long>(INT64_MAX)) fail(t, "literal too large");
      e->value = static_cast<int64_t>(v);
      // Unsized decimals are signed; size them to the minimal signed width.
      e->lit_ann = min_annotation(e->value, e->value);
      if (!e->lit_ann.is_signed()) e->lit_ann = signed_of(e->lit_ann.width + 1);
      if (e->lit_ann.width > kMaxWidth) fail(t, "literal too large");
      return e;
    }
    bool sized = q > 0;
    uint32_t size = sized ? static_cast<uint32_t>(std::stoul(s.substr(0, q))) : 0;
    size_t i = q + 1;
    bool is_signed = false;
    if (i < s.size() && (s[i] == 's' || s[i] == 'S')) {
      is_signed = true;
      ++i;
    }
    if (i >= s.size()) fail(t, "malformed literal");
    char base = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++])));
    int radix = base == 'd' ? 10 : base == 'h' ? 16 : base == 'b' ? 2 : base == 'o' ? 8 : 0;
    if (radix == 0) fail(t, "malformed literal base");
    std::string digits = s.substr(i);
    if (digits.empty()) fail(t, "malformed literal");
    Wide v = 0;
    for (char c : digits) {
      char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lc == 'x' || lc == 'z' || lc == '?') fail(t, "unsupported construct: four-state literal");
      int d = std::isdigit(static_cast<unsigned char>(lc)) ? lc - '0' : (lc >= 'a' && lc <= 'f' ? lc - 'a' + 10 : 99);
      if (d >= radix) fail(t, "malformed literal digit");
      v = v * radix + d;
      if (v > (Wide{1} << 64)) fail(t, "literal too large");
    }
    if (!sized) {
      Annotation a = min_annotation(v, v);
      size = a.width;
    }
    if (size < 1 || size > kMaxWidth) fail(t, fmt::format("literal width {} unsupported", size));
    if (v >= (Wide{1} << size)) fail(t, "literal value exceeds its size");
    Annotation ann{size, is_signed ? Signage::Signed : Signage::Unsigned};
    e->lit_ann = ann;
    e->value = wrap_pattern(static_cast<uint64_t>(v), ann);
    return e;
  }

  // ---- elaboration ----

  const Signal& signal_of(const Expr& e) {
    auto it = signals_.find(e.op);
    if (it == signals_.end() || !it->second.declared) fail_at(e, fmt::format("undeclared identifier '{}'", e.op));
    return it->second;
  }

  SelfType self_type(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Ident: {
        const auto& s = signal_of(e);
        return {s.ann.width, s.ann.is_signed()};
      }
      case ExprKind::Literal:
        return {e.lit_ann.width, e.lit_ann.is_signed()};
      case ExprKind::Unary:
        return self_type(*e.kids[0]);
      case ExprKind::Binary: {
        if (e.op == "<<" || e.op == ">>" || e.op == ">>>") return self_type(*e.kids[0]);
        if (e.op == "==" || e.op == "!=" || e.op == "<" || e.op == "<=" || e.op == ">" || e.op == ">=") {
          return {1, false};
        }
        auto a = self_type(*e.kids[0]);
        auto b = self_type(*e.kids[1]);
        return {std::max(a.width, b.width), a.is_signed && b.is_signed};
      }
      case ExprKind::Ternary: {
        auto a = self_type(*e.kids[1]);
        auto b = self_type(*e.kids[2]);
        return {std::max(a.width, b.width), a.is_signed && b.is_signed};
      }
      case ExprKind::Concat: {
        uint32_t w = 0;
        for (const auto& k : e.kids) w += self_type(*k).width;
        if (w > kMaxWidth) fail_at(e, "concatenation wider than the supported maximum");
        return {w, false};
      }
      case ExprKind::Select:
        return {e.hi - e.lo + 1, false};
      case ExprKind::Cast:
        return {self_type(*e.kids[0]).width, e.op == "$signed"};
    }
    return {1, false};
  }

  TermPtr signal_term(const Expr& at, const std::string& name) {
    auto it = signals_.find(name);
    if (it == signals_.end() || !it->second.declared) fail_at(at, fmt::format("undeclared identifier '{}'", name));
    Signal& s = it->second;
    if (s.dir == Dir::Input) return make_var(s.name, s.ann);
    if (auto r = resolved_.find(name); r != resolved_.end()) return r->second;
    if (visiting_[name]) fail_at(at, fmt::format("combinational cycle through '{}'", name));
    if (!s.driver) fail_at(at, fmt::format("'{}' is never driven", name));
    visiting_[name] = 1;
    TermPtr t = assignment(*s.driver, s.ann);
    visiting_[name] = 0;
    resolved_[name] = t;
    return t;
  }

  struct Built {
    TermPtr term;
    bool fresh;  // built by this expression, safe to relabel
  };

  Operand operand(const Built& b, Annotation ann) { return {ann, b.term}; }

  Built build(const Expr& e, uint32_t wc, bool sc) {
    Signage ctx = sc ? Signage::Signed : Signage::Unsigned;
    auto ctx_operand = [&](const Built& b) { return operand(b, {b.term->out.width, ctx}); };
    auto self_built = [&](const Expr& k) {
      auto st = self_type(k);
      return build(k, st.width, st.is_signed);
    };
    try {
      switch (e.kind) {
        case ExprKind::Ident:
          return {signal_term(e, e.op), false};
        case ExprKind::Literal:
          return {make_const(e.value, e.lit_ann), false};
        case ExprKind::Unary: {
          Built a = build(*e.kids[0], wc, sc);
          Opcode op = e.op == "-" ? Opcode::Neg : Opcode::Not;
          return {make_op(op, {wc, ctx}, {ctx_operand(a)}), true};
        }
        case ExprKind::Binary: {
          const std::string& o = e.op;
          if (o == "<<" || o == ">>" || o == ">>>") {
            Built a = build(*e.kids[0], wc, sc);
            Built s = self_built(*e.kids[1]);
            Opcode op = o == "<<" ? Opcode::Shl : o == ">>" ? Opcode::Shr : Opcode::Sra;
            Annotation left{a.term->out.width, ctx};
            // A signed logical right shift sees the sign-extended context-width pattern.
            if (op == Opcode::Shr && sc) left = {wc, ctx};
            return {make_op(op, {wc, ctx}, {operand(a, left), operand(s, s.term->out)}), true};
          }
          if (o == "==" || o == "!=" || o == "<" || o == "<=" || o == ">" || o == ">=") {
            auto ta = self_type(*e.kids[0]);
            auto tb = self_type(*e.kids[1]);
            uint32_t w = std::max(ta.width, tb.width);
            bool s = ta.is_signed && tb.is_signed;
            Signage cs = s ? Signage::Signed : Signage::Unsigned;
            Built a = build(*e.kids[0], w, s);
            Built b = build(*e.kids[1], w, s);
            Operand oa{{a.term->out.width, cs}, a.term};
            Operand ob{{b.term->out.width, cs}, b.term};
            TermPtr r;
            bool negate = false;
            if (o == "==" || o == "!=") {
              r = make_op(Opcode::Eq, unsigned_of(1), {oa, ob});
              negate = o == "!=";
            } else if (o == "<" || o == ">=") {
              r = make_op(Opcode::Lt, unsigned_of(1), {oa, ob});
              negate = o == ">=";
            } else {
              r = make_op(Opcode::Lt, unsigned_of(1), {ob, oa});
              negate = o == "<=";
            }
            if (negate) {
              r = make_op(Opcode::Xor, unsigned_of(1),
                          {{unsigned_of(1), r}, {unsigned_of(1), make_const(1, unsigned_of(1))}});
            }
            return {r, true};
          }
          Opcode op;
          if (o == "+") op = Opcode::Add;
          else if (o == "-") op = Opcode::Sub;
          else if (o == "*") op = Opcode::Mul;
          else if (o == "&") op = Opcode::And;
          else if (o == "|") op = Opcode::Or;
          else if (o == "^") op = Opcode::Xor;
          else fail_at(e, fmt::format("unsupported operator '{}'", o));
          Built a = build(*e.kids[0], wc, sc);
          Built b = build(*e.kids[1], wc, sc);
          return {make_op(op, {wc, ctx}, {ctx_operand(a), ctx_operand(b)}), true};
        }
        case ExprKind::Ternary: {
          Built c = self_built(*e.kids[0]);
          Built a = build(*e.kids[1], wc, sc);
          Built b = build(*e.kids[2], wc, sc);
          return {make_op(Opcode::Mux, {wc, ctx}, {operand(c, c.term->out), ctx_operand(a), ctx_operand(b)}), true};
        }
        case ExprKind::Concat: {
          std::vector<Built> parts;
          for (const auto& k : e.kids) parts.push_back(self_built(*k));
          Built acc = parts.back();
          for (size_t i = parts.size() - 1; i-- > 0;) {
            uint32_t w = parts[i].term->out.width + acc.term->out.width;
            acc = {make_op(Opcode::Concat, unsigned_of(w),
                           {operand(parts[i], parts[i].term->out), operand(acc, acc.term->out)}),
                   true};
          }
          return acc;
        }
        case ExprKind::Select: {
          const auto& s = signal_of(e);
          if (e.lo < s.range_lo || e.hi - s.range_lo >= s.ann.width) fail_at(e, "select out of the declared range");
          TermPtr base = signal_term(e, e.op);
          OpSpec spec{Opcode::Slice, e.hi - s.range_lo, e.lo - s.range_lo};
          return {make_op(spec, unsigned_of(e.hi - e.lo + 1), {{base->out, base}}), true};
        }
        case ExprKind::Cast: {
          Built a = self_built(*e.kids[0]);
          Signage target = e.op == "$signed" ? Signage::Signed : Signage::Unsigned;
          if (a.term->out.sign == target) return a;
          Opcode op = target == Signage::Signed ? Opcode::Sext : Opcode::Zext;
          return {make_op(op, {a.term->out.width, target}, {operand(a, a.term->out)}), true};
        }
      }
    } catch (const IrError& err) {
      fail_at(e, err.what());
    }
    fail_at(e, "unsupported expression");
  }

  TermPtr assignment(const Expr& rhs, Annotation target) {
    auto st = self_type(rhs);
    uint32_t wc = std::max(target.width, st.width);
    if (wc > kMaxWidth) fail_at(rhs, fmt::format("expression width {} exceeds the supported maximum", wc));
    Built b = build(rhs, wc, st.is_signed);
    const TermPtr& t = b.term;
    if (t->out == target) return t;
    if (t->is_const()) return make_const(coerce(t->value, t->out, target), target);
    if (b.fresh && t->is_op()) return make_op(t->spec, target, t->operands);
    Opcode op = (t->out.is_signed() && target.width > t->out.width) ? Opcode::Sext : Opcode::Zext;
    return make_op(op, target, {{t->out, t}});
  }

  Design elaborate(const std::string& name, const std::vector<std::string>& header_ports) {
    Design d;
    d.name = name;
    std::vector<std::string> port_order = header_ports.empty() ? order_ : header_ports;
    for (const auto& p : header_ports) {
      auto it = signals_.find(p);
      if (it == signals_.end() || !it->second.declared || it->second.dir == Dir::Internal) {
        throw ParseError(fmt::format("port '{}' has no direction declaration", p));
      }
    }
    const Signal* out = nullptr;
    for (const auto& n : port_order) {
      const Signal& s = signals_.at(n);
      if (s.dir == Dir::Input) d.inputs.push_back({s.name, s.ann});
      if (s.dir == Dir::Output) {
        if (out) throw ParseError(fmt::format("unsupported construct: multiple outputs ('{}')", n), s.line, s.column);
        out = &s;
      }
    }
    for (const auto& [n, s] : signals_) {
      if (s.dir != Dir::Internal && std::find(port_order.begin(), port_order.end(), n) == port_order.end()) {
        throw ParseError(fmt::format("'{}' declared as a port but missing from the port list", n), s.line, s.column);
      }
    }
    if (!out) throw ParseError("module has no output");
    d.output = {out->name, out->ann};
    Expr at;
    at.line = out->line;
    at.column = out->column;
    d.body = signal_term(at, out->name);
    validate_design(d);
    return d;
  }
};

}  // namespace

Design parse_sv(std::string_view text) { return SvParser(text).parse(); }

}  // namespace wlec
