#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "wlec/frontend.hpp"

namespace wlec {

namespace {

struct Token {
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), line, col});
      advance(1);
    } else {
      size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')' && text[j] != ';') {
        ++j;
      }
      out.push_back({std::string(text.substr(i, j - i)), line, col});
      advance(j - i);
    }
  }
  return out;
}

class Reader {
 public:
  Reader(std::vector<Token> toks, const std::vector<Port>* ports) : toks_(std::move(toks)), ports_(ports) {}

  bool done() const { return pos_ >= toks_.size(); }

  const Token& peek() const {
    if (done()) {
      int l = toks_.empty() ? 1 : toks_.back().line;
      int c = toks_.empty() ? 1 : toks_.back().column;
      throw ParseError("unexpected end of input", l, c);
    }
    return toks_[pos_];
  }

  Token next() {
    Token t = peek();
    ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(msg, t.line, t.column); }

  void expect(std::string_view s) {
    Token t = next();
    if (t.text != s) fail(t, fmt::format("expected '{}', found '{}'", s, t.text));
  }

  std::string atom() {
    Token t = next();
    if (t.text == "(" || t.text == ")") fail(t, fmt::format("expected an atom, found '{}'", t.text));
    return t.text;
  }

  int64_t integer() {
    Token t = next();
    int64_t v = 0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail(t, fmt::format("expected an integer, found '{}'", t.text));
    return v;
  }

  Annotation annotation() {
    Token wt = peek();
    int64_t w = integer();
    Token st = next();
    auto s = signage_from_string(st.text);
    if (!s) fail(st, fmt::format("expected signage, found '{}'", st.text));
    if (w < 1 || w > kMaxWidth) fail(wt, fmt::format("width {} outside [1, {}]", w, kMaxWidth));
    return {static_cast<uint32_t>(w), *s};
  }

  TermPtr term() {
    if (peek().text != "(") {
      // Bare NAME: a variable reference resolved against the port list.
      Token t = next();
      if (t.text == ")") fail(t, "missing operand");
      if (!ports_) fail(t, fmt::format("bare variable '{}' needs port declarations", t.text));
      auto it = std::find_if(ports_->begin(), ports_->end(), [&](const Port& p) { return p.name == t.text; });
      if (it == ports_->end()) fail(t, fmt::format("undeclared variable '{}'", t.text));
      return make_var(it->name, it->ann);
    }
    expect("(");
    Token head = next();
    TermPtr result;
    try {
      if (head.text == "var") {
        std::string name = atom();
        Annotation a = annotation();
        if (ports_) {
          auto it = std::find_if(ports_->begin(), ports_->end(), [&](const Port& p) { return p.name == name; });
          if (it == ports_->end()) fail(head, fmt::format("undeclared variable '{}'", name));
          if (it->ann != a) fail(head, fmt::format("variable '{}' annotation differs from its declaration", name));
        }
        result = make_var(name, a);
      } else if (head.text == "const") {
        int64_t v = integer();
        Annotation a = annotation();
        result = make_const(v, a);
      } else {
        auto op = opcode_from_string(head.text);
        if (!op) fail(head, fmt::format("unknown operator '{}'", head.text));
        Annotation out = annotation();
        OpSpec spec{*op, 0, 0};
        if (*op == Opcode::Slice) {
          spec.hi = static_cast<uint32_t>(integer());
          spec.lo = static_cast<uint32_t>(integer());
        }
        std::vector<Operand> operands;
        while (peek().text != ")") {
          Annotation a = annotation();
          operands.push_back({a, term()});
        }
        result = make_op(spec, out, std::move(operands));
      }
    } catch (const IrError& e) {
      fail(head, e.what());
    }
    expect(")");
    return result;
  }

  void set_ports(const std::vector<Port>* ports) { ports_ = ports; }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  const std::vector<Port>* ports_;
};

}  // namespace

std::vector<std::string> Design::input_names() const {
  std::vector<std::string> out;
  for (const auto& p : inputs) out.push_back(p.name);
  return out;
}

uint32_t Design::total_input_bits() const {
  uint32_t s = 0;
  for (const auto& p : inputs) s += p.ann.width;
  return s;
}

void validate_design(const Design& d) {
  std::set<std::string> names;
  for (const auto& p : d.inputs) {
    if (!names.insert(p.name).second) throw ParseError(fmt::format("duplicate input '{}'", p.name));
    if (!valid_annotation(p.ann)) throw ParseError(fmt::format("invalid width for input '{}'", p.name));
  }
  if (!d.body) throw ParseError("design has no body");
  if (d.body->out != d.output.ann) {
    throw ParseError(fmt::format("body annotation {} {} differs from output '{}'", d.body->out.width,
                                 to_string(d.body->out.sign), d.output.name));
  }
  std::set<const Term*> seen;
  std::function<void(const Term&)> go = [&](const Term& t) {
    if (!seen.insert(&t).second) return;
    if (t.is_var()) {
      auto it = std::find_if(d.inputs.begin(), d.inputs.end(), [&](const Port& p) { return p.name == t.name; });
      if (it == d.inputs.end()) throw ParseError(fmt::format("undeclared variable '{}'", t.name));
      if (it->ann != t.out) throw ParseError(fmt::format("variable '{}' annotation differs from its port", t.name));
    }
    for (const auto& o : t.operands) go(*o.term);
  };
  go(*d.body);
}

TermPtr parse_term(std::string_view text, const std::vector<Port>* ports) {
  Reader r(tokenize(text), ports);
  TermPtr t = r.term();
  if (!r.done()) r.fail(r.peek(), "trailing input after term");
  return t;
}

Design parse_sexpr(std::string_view text) {
  Reader r(tokenize(text), nullptr);
  Design d;
  r.expect("(");
  r.expect("design");
  d.name = r.atom();
  r.expect("(");
  r.expect("inputs");
  while (r.peek().text != ")") {
    r.expect("(");
    Port p;
    p.name = r.atom();
    p.ann = r.annotation();
    r.expect(")");
    d.inputs.push_back(p);
  }
  r.expect(")");
  r.expect("(");
  r.expect("output");
  d.output.name = r.atom();
  d.output.ann = r.annotation();
  r.expect(")");
  Token body_start = r.peek();
  r.set_ports(&d.inputs);
  d.body = r.term();
  r.expect(")");
  if (!r.done()) r.fail(r.peek(), "trailing input after design");
  try {
    validate_design(d);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), body_start.line, body_start.column);
  }
  return d;
}

std::string emit_sexpr(const Design& d) {
  std::string s = fmt::format("(design {}\n  (inputs", d.name);
  for (const auto& p : d.inputs) s += fmt::format(" ({} {} {})", p.name, p.ann.width, to_string(p.ann.sign));
  s += fmt::format(")\n  (output {} {} {})\n  {})\n", d.output.name, d.output.ann.width,
                   to_string(d.output.ann.sign), format_term(d.body));
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Design load_design(const std::string& path) {
  std::string text = read_file(path);
  auto ends_with = [&](std::string_view suf) {
    return path.size() >= suf.size() && path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with(".sv") || ends_with(".v")) return parse_sv(text);
  return parse_sexpr(text);
}

}  // namespace wlec
