// IR to SystemVerilog. Every distinct operator becomes one continuously
// assigned wire; operand annotations that differ from the child's output get
// an explicit coercion wire so Verilog's own sizing rules never come into play.

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "wlec/frontend.hpp"

namespace wlec {

namespace {

std::string decl_type(Annotation a) {
  return fmt::format("{}[{}:0]", a.is_signed() ? "signed " : "", a.width - 1);
}

std::string literal(int64_t v, Annotation a) {
  uint64_t pattern = static_cast<uint64_t>(v);
  if (a.width < 64) pattern &= (uint64_t{1} << a.width) - 1;
  return fmt::format("{}'{}h{:x}", a.width, a.is_signed() ? "s" : "", pattern);
}

struct TermKey {
  TermPtr t;
  bool operator==(const TermKey& o) const { return terms_equal(t, o.t); }
};

struct TermKeyHash {
  size_t operator()(const TermKey& k) const { return term_hash(k.t); }
};

class SvWriter {
 public:
  explicit SvWriter(const Design& d) : design_(d) {
    prefix_ = "t";
    auto clashes = [&] {
      if (d.output.name.rfind(prefix_, 0) == 0) return true;
      return std::any_of(d.inputs.begin(), d.inputs.end(),
                         [&](const Port& p) { return p.name.rfind(prefix_, 0) == 0; });
    };
    while (clashes()) prefix_ += "_";
  }

  std::string run() {
    std::string top;
    const TermPtr& body = design_.body;
    if (body->is_op()) {
      top = fmt::format("  assign {} = {};\n", design_.output.name, node_expr(*body));
    } else {
      top = fmt::format("  assign {} = {};\n", design_.output.name, leaf(*body));
    }
    std::string s = fmt::format("module {}(", design_.name);
    for (const auto& p : design_.inputs) s += fmt::format("input logic {} {}, ", decl_type(p.ann), p.name);
    s += fmt::format("output logic {} {});\n", decl_type(design_.output.ann), design_.output.name);
    s += decls_;
    s += body_;
    s += top;
    s += "endmodule\n";
    return s;
  }

 private:
  const Design& design_;
  std::string prefix_;
  std::string decls_;
  std::string body_;
  int counter_ = 0;
  std::unordered_map<TermKey, std::string, TermKeyHash> names_;

  std::string fresh(Annotation a, const std::string& rhs) {
    std::string n = fmt::format("{}{}", prefix_, counter_++);
    decls_ += fmt::format("  logic {} {};\n", decl_type(a), n);
    body_ += fmt::format("  assign {} = {};\n", n, rhs);
    return n;
  }

  std::string leaf(const Term& t) {
    if (t.is_var()) return t.name;
    return literal(t.value, t.out);
  }

  // Name or literal carrying the child's own output value.
  std::string value_of(const TermPtr& t) {
    if (!t->is_op()) return leaf(*t);
    auto it = names_.find({t});
    if (it != names_.end()) return it->second;
    std::string n = fresh(t->out, node_expr(*t));
    names_.emplace(TermKey{t}, n);
    return n;
  }

  // Signal holding the operand value reinterpreted at annotation `a`.
  std::string coerced(const Operand& o, Annotation a, bool need_name) {
    const TermPtr& t = o.term;
    if (t->is_const()) {
      std::string lit = literal(coerce(t->value, t->out, a), a);
      return need_name ? fresh(a, lit) : lit;
    }
    std::string v = value_of(t);
    if (a == t->out) return v;
    return fresh(a, v);
  }

  std::string node_expr(const Term& t) {
    const auto& ops = t.operands;
    std::vector<Annotation> anns;
    for (const auto& o : ops) anns.push_back(o.ann);
    auto shared_sign = [&](std::vector<size_t> idx) {
      bool any_signed = false;
      bool any_unsigned = false;
      for (size_t i : idx) (anns[i].is_signed() ? any_signed : any_unsigned) = true;
      if (any_signed && any_unsigned) {
        for (size_t i : idx) {
          if (!anns[i].is_signed()) anns[i] = signed_of(anns[i].width + 1);
        }
      }
    };
    auto arg = [&](size_t i, bool need_name = false) {
      // Widened operands go through a wire from the original operand value.
      if (anns[i] == ops[i].ann) return coerced(ops[i], anns[i], need_name);
      return fresh(anns[i], coerced(ops[i], ops[i].ann, false));
    };
    switch (t.spec.op) {
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::And:
      case Opcode::Or:
      case Opcode::Xor:
      case Opcode::Eq:
      case Opcode::Lt: {
        static const std::unordered_map<Opcode, const char*> sym = {
            {Opcode::Add, "+"}, {Opcode::Sub, "-"}, {Opcode::Mul, "*"}, {Opcode::And, "&"},
            {Opcode::Or, "|"},  {Opcode::Xor, "^"}, {Opcode::Eq, "=="}, {Opcode::Lt, "<"}};
        shared_sign({0, 1});
        std::string a = arg(0);
        std::string b = arg(1);
        return fmt::format("{} {} {}", a, sym.at(t.spec.op), b);
      }
      case Opcode::Neg:
        return fmt::format("-{}", arg(0));
      case Opcode::Not:
        return fmt::format("~{}", arg(0));
      case Opcode::Shl:
      case Opcode::Sra: {
        std::string a = arg(0);
        std::string s = arg(1);
        return fmt::format("{} {} {}", a, t.spec.op == Opcode::Shl ? "<<" : ">>>", s);
      }
      case Opcode::Shr: {
        std::string a = arg(0);
        std::string s = arg(1);
        if (anns[0].is_signed()) return fmt::format("$unsigned({}) >> {}", a, s);
        return fmt::format("{} >> {}", a, s);
      }
      case Opcode::Mux: {
        shared_sign({1, 2});
        std::string c = arg(0);
        std::string a = arg(1);
        std::string b = arg(2);
        return fmt::format("{} ? {} : {}", c, a, b);
      }
      case Opcode::Concat: {
        std::string a = arg(0, true);
        std::string b = arg(1, true);
        return fmt::format("{{{}, {}}}", a, b);
      }
      case Opcode::Slice: {
        if (t.spec.hi >= anns[0].width) anns[0] = {t.spec.hi + 1, anns[0].sign};
        std::string a = arg(0, true);
        if (t.spec.hi == t.spec.lo) return fmt::format("{}[{}]", a, t.spec.hi);
        return fmt::format("{}[{}:{}]", a, t.spec.hi, t.spec.lo);
      }
      case Opcode::Zext:
        return fmt::format("$unsigned({})", arg(0));
      case Opcode::Sext:
        return fmt::format("$signed({})", arg(0));
    }
    throw Error("unhandled opcode in SystemVerilog writer");
  }
};

}  // namespace

std::string emit_sv(const Design& d) { return SvWriter(d).run(); }

}  // namespace wlec
