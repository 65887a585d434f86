#include "wlec/rewrites.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

#include "wlec/analysis.hpp"

namespace wlec {

namespace {

const char* const kCatalogue = R"(# Commutativity.
comm-add : (+ ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b) => (+ ?wo ?so ?w2 ?s2 ?b ?w1 ?s1 ?a) with trivial ;
comm-mul : (* ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b) => (* ?wo ?so ?w2 ?s2 ?b ?w1 ?s1 ?a) with trivial ;

# Associativity. The inner result must be exact and survive the outer coercion.
assoc-add : (+ ?wo ?so ?wx ?sx (+ ?wi ?si ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  => (+ ?wo ?so ?w1 ?s1 ?a [ew(+,?w2,?s2,?w3,?s3)] [es(+,?w2,?s2,?w3,?s3)]
        (+ [ew(+,?w2,?s2,?w3,?s3)] [es(+,?w2,?s2,?w3,?s3)] ?w2 ?s2 ?b ?w3 ?s3 ?c))
  if nt(+,?wi,?si,?w1,?s1,?w2,?s2) && nt(+,?wx,?sx,?w1,?s1,?w2,?s2) ;
assoc-add-rev : (+ ?wo ?so ?w1 ?s1 ?a ?wx ?sx (+ ?wi ?si ?w2 ?s2 ?b ?w3 ?s3 ?c))
  => (+ ?wo ?so [ew(+,?w1,?s1,?w2,?s2)] [es(+,?w1,?s1,?w2,?s2)]
        (+ [ew(+,?w1,?s1,?w2,?s2)] [es(+,?w1,?s1,?w2,?s2)] ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  if nt(+,?wi,?si,?w2,?s2,?w3,?s3) && nt(+,?wx,?sx,?w2,?s2,?w3,?s3) ;
assoc-mul : (* ?wo ?so ?wx ?sx (* ?wi ?si ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  => (* ?wo ?so ?w1 ?s1 ?a [ew(*,?w2,?s2,?w3,?s3)] [es(*,?w2,?s2,?w3,?s3)]
        (* [ew(*,?w2,?s2,?w3,?s3)] [es(*,?w2,?s2,?w3,?s3)] ?w2 ?s2 ?b ?w3 ?s3 ?c))
  if nt(*,?wi,?si,?w1,?s1,?w2,?s2) && nt(*,?wx,?sx,?w1,?s1,?w2,?s2) ;
assoc-mul-rev : (* ?wo ?so ?w1 ?s1 ?a ?wx ?sx (* ?wi ?si ?w2 ?s2 ?b ?w3 ?s3 ?c))
  => (* ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)]
        (* [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)] ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  if nt(*,?wi,?si,?w2,?s2,?w3,?s3) && nt(*,?wx,?sx,?w2,?s2,?w3,?s3) ;

# The same with the inner sum shown exact by the operand intervals.
assoc-add-iv : (+ ?wo ?so ?wx ?sx (+ ?wi ?si ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  => (+ ?wo ?so ?w1 ?s1 ?a [ew(+,?w2,?s2,?w3,?s3)] [es(+,?w2,?s2,?w3,?s3)]
        (+ [ew(+,?w2,?s2,?w3,?s3)] [es(+,?w2,?s2,?w3,?s3)] ?w2 ?s2 ?b ?w3 ?s3 ?c))
  if fits(clo(?a),chi(?a),?w1,?s1) && fits(clo(?b),chi(?b),?w2,?s2)
     && fits(clo(?a)+clo(?b),chi(?a)+chi(?b),?wi,?si) && fits(clo(?a)+clo(?b),chi(?a)+chi(?b),?wx,?sx) ;
assoc-add-rev-iv : (+ ?wo ?so ?w1 ?s1 ?a ?wx ?sx (+ ?wi ?si ?w2 ?s2 ?b ?w3 ?s3 ?c))
  => (+ ?wo ?so [ew(+,?w1,?s1,?w2,?s2)] [es(+,?w1,?s1,?w2,?s2)]
        (+ [ew(+,?w1,?s1,?w2,?s2)] [es(+,?w1,?s1,?w2,?s2)] ?w1 ?s1 ?a ?w2 ?s2 ?b) ?w3 ?s3 ?c)
  if fits(clo(?b),chi(?b),?w2,?s2) && fits(clo(?c),chi(?c),?w3,?s3)
     && fits(clo(?b)+clo(?c),chi(?b)+chi(?c),?wi,?si) && fits(clo(?b)+clo(?c),chi(?b)+chi(?c),?wx,?sx) ;

# Shifts by sums and nested shifts.
unmerge-shift : (<< ?wo ?so ?wa ?sa ?a ?wp ?sp (+ ?wq ?sq ?wb unsigned ?b ?wc unsigned ?c))
  => (<< ?wo ?so [ew(<<,?wa,?sa,?wb,unsigned)] [es(<<,?wa,?sa,?wb,unsigned)]
        (<< [ew(<<,?wa,?sa,?wb,unsigned)] [es(<<,?wa,?sa,?wb,unsigned)] ?wa ?sa ?a ?wb unsigned ?b)
        ?wc unsigned ?c)
  if nt(+,?wq,?sq,?wb,unsigned,?wc,unsigned) && nt(+,?wp,?sp,?wb,unsigned,?wc,unsigned) ;
merge-shift : (<< ?wo ?so ?wx ?sx (<< ?wi ?si ?wa ?sa ?a ?wb ?sb ?b) ?wc ?sc ?c)
  => (<< ?wo ?so ?wa ?sa ?a [ew(+,?wb,unsigned,?wc,unsigned)] unsigned
        (+ [ew(+,?wb,unsigned,?wc,unsigned)] unsigned ?wb unsigned ?b ?wc unsigned ?c))
  if nt(<<,?wi,?si,?wa,?sa,?wb,?sb) && nt(<<,?wx,?sx,?wa,?sa,?wb,?sb) ;

# Moving a shift across a product.
mult-left-shift : (* ?wo ?so ?w1 ?s1 ?a ?wx ?sx (<< ?wi ?si ?w2 ?s2 ?b ?wc ?sc ?c))
  => (<< ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)]
        (* [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)] ?w1 ?s1 ?a ?w2 ?s2 ?b) ?wc ?sc ?c)
  if nt(<<,?wi,?si,?w2,?s2,?wc,?sc) && nt(<<,?wx,?sx,?w2,?s2,?wc,?sc)
  with external-strong ;
left-shift-mult : (<< ?wo ?so ?wx ?sx (* ?wi ?si ?w1 ?s1 ?a ?w2 ?s2 ?b) ?wc ?sc ?c)
  => (* ?wo ?so ?w1 ?s1 ?a [ew(<<,?w2,?s2,?wc,?sc)] [es(<<,?w2,?s2,?wc,?sc)]
        (<< [ew(<<,?w2,?s2,?wc,?sc)] [es(<<,?w2,?s2,?wc,?sc)] ?w2 ?s2 ?b ?wc ?sc ?c))
  if nt(*,?wi,?si,?w1,?s1,?w2,?s2) && nt(*,?wx,?sx,?w1,?s1,?w2,?s2)
  with external-strong ;
left-shift-mult-l : (<< ?wo ?so ?wx ?sx (* ?wi ?si ?w1 ?s1 ?a ?w2 ?s2 ?b) ?wc ?sc ?c)
  => (* ?wo ?so [ew(<<,?w1,?s1,?wc,?sc)] [es(<<,?w1,?s1,?wc,?sc)]
        (<< [ew(<<,?w1,?s1,?wc,?sc)] [es(<<,?w1,?s1,?wc,?sc)] ?w1 ?s1 ?a ?wc ?sc ?c) ?w2 ?s2 ?b)
  if nt(*,?wi,?si,?w1,?s1,?w2,?s2) && nt(*,?wx,?sx,?w1,?s1,?w2,?s2)
  with external-strong ;

# Strength reduction with constants.
shift-to-mult : (<< ?wo ?so ?wa ?sa ?a ?wk ?sk (const ?k ?wc ?sc))
  => (* ?wo ?so ?wa ?sa ?a [shamt(?k,?wc,?sc,?wk) + 1] unsigned
        (const [2 ^ shamt(?k,?wc,?sc,?wk)] [shamt(?k,?wc,?sc,?wk) + 1] unsigned))
  if shamt(?k,?wc,?sc,?wk) <= 62 ;
mult-to-shift : (* ?wo ?so ?wa ?sa ?a ?wk ?sk (const ?k ?wc ?sc))
  => (<< ?wo ?so ?wa ?sa ?a [bits(log2(coerce(?k,?wc,?sc,?wk,?sk)))] unsigned
        (const [log2(coerce(?k,?wc,?sc,?wk,?sk))] [bits(log2(coerce(?k,?wc,?sc,?wk,?sk)))] unsigned))
  if ispow2(coerce(?k,?wc,?sc,?wk,?sk)) ;
mult-to-add : (* ?wo ?so ?wa ?sa ?a ?wk ?sk (const ?k ?wc ?sc))
  => (+ ?wo ?so ?wa ?sa ?a ?wa ?sa ?a)
  if coerce(?k,?wc,?sc,?wk,?sk) == 2 ;
shift-cancel : (>> ?wo ?so ?wx ?sx (<< ?wi ?si ?wa ?sa ?a ?wk ?sk ?s) ?wk2 ?sk2 ?s) => ?a
  if cw(?a) == ?wo && cs(?a) == ?so && cw(?a) == ?wa && cs(?a) == ?sa && ?sa == unsigned
     && ?wk == ?wk2 && nt(<<,?wi,?si,?wa,?sa,?wk,?sk) && nt(<<,?wx,?sx,?wa,?sa,?wk,?sk) ;

# Extensions.
zext-fold : (zext ?wo ?so ?wx ?sx (zext ?wi ?si ?wa ?sa ?a)) => (zext ?wo ?so ?wa ?sa ?a)
  if ?wi >= ?wa + ?si && ?wx >= ?wa + ?sx with trivial ;
# An operand that is a value-preserving zero extension can take its source directly.
zext-absorb-add : (+ ?wo ?so ?w1 ?s1 (zext ?w1 ?s1 ?wa unsigned ?a) ?w2 ?s2 ?b) => (+ ?wo ?so ?wa unsigned ?a ?w2 ?s2 ?b)
  if ?w1 >= ?wa + ?s1 with trivial ;
zext-absorb-mul : (* ?wo ?so ?w1 ?s1 (zext ?w1 ?s1 ?wa unsigned ?a) ?w2 ?s2 ?b) => (* ?wo ?so ?wa unsigned ?a ?w2 ?s2 ?b)
  if ?w1 >= ?wa + ?s1 with trivial ;
zext-absorb-shl : (<< ?wo ?so ?w1 ?s1 (zext ?w1 ?s1 ?wa unsigned ?a) ?w2 ?s2 ?b) => (<< ?wo ?so ?wa unsigned ?a ?w2 ?s2 ?b)
  if ?w1 >= ?wa + ?s1 with trivial ;
zext-intro-add : (+ ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (zext ?wo ?so [ew(+,?w1,?s1,?w2,?s2)] unsigned (+ [ew(+,?w1,?s1,?w2,?s2)] unsigned ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(+,?w1,?s1,?w2,?s2) == unsigned && (ew(+,?w1,?s1,?w2,?s2) != ?wo || ?so != unsigned)
  with trivial manual ;
zext-intro-mul : (* ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (zext ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] unsigned (* [ew(*,?w1,?s1,?w2,?s2)] unsigned ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(*,?w1,?s1,?w2,?s2) == unsigned && (ew(*,?w1,?s1,?w2,?s2) != ?wo || ?so != unsigned)
  with trivial manual ;
zext-intro-shl : (<< ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (zext ?wo ?so [ew(<<,?w1,?s1,?w2,?s2)] unsigned (<< [ew(<<,?w1,?s1,?w2,?s2)] unsigned ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(<<,?w1,?s1,?w2,?s2) == unsigned && (ew(<<,?w1,?s1,?w2,?s2) != ?wo || ?so != unsigned)
  with trivial manual ;
sext-intro-add : (+ ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (sext ?wo ?so [ew(+,?w1,?s1,?w2,?s2)] signed (+ [ew(+,?w1,?s1,?w2,?s2)] signed ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(+,?w1,?s1,?w2,?s2) == signed && (ew(+,?w1,?s1,?w2,?s2) != ?wo || ?so != signed)
  with trivial manual ;
sext-intro-sub : (- ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (sext ?wo ?so [ew(-,?w1,?s1,?w2,?s2)] signed (- [ew(-,?w1,?s1,?w2,?s2)] signed ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(-,?w1,?s1,?w2,?s2) == signed && (ew(-,?w1,?s1,?w2,?s2) != ?wo || ?so != signed)
  with trivial manual ;
sext-intro-mul : (* ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b)
  => (sext ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] signed (* [ew(*,?w1,?s1,?w2,?s2)] signed ?w1 ?s1 ?a ?w2 ?s2 ?b))
  if es(*,?w1,?s1,?w2,?s2) == signed && (ew(*,?w1,?s1,?w2,?s2) != ?wo || ?so != signed)
  with trivial manual ;
)";

using Params = std::map<std::string, int64_t>;

int64_t sign_value(Signage s) { return s == Signage::Signed ? 1 : 0; }

bool bind_slot(const Slot& s, int64_t v, Params& params) {
  switch (s.kind) {
    case Slot::Kind::Lit:
      return s.lit == v;
    case Slot::Kind::Param: {
      auto [it, fresh] = params.emplace(s.param, v);
      return fresh || it->second == v;
    }
    case Slot::Kind::Computed:
      return false;  // rejected by the parser on left-hand sides
  }
  return false;
}

int64_t slot_value(const Slot& s, const ExprContext& ctx) {
  switch (s.kind) {
    case Slot::Kind::Lit:
      return s.lit;
    case Slot::Kind::Param: {
      auto it = ctx.params->find(s.param);
      if (it == ctx.params->end()) throw EvalError(fmt::format("unbound parameter '?{}'", s.param));
      return it->second;
    }
    case Slot::Kind::Computed: {
      Wide v = eval_expr(*s.expr, ctx);
      if (v < INT64_MIN || v > INT64_MAX) throw EvalError("computed slot out of range");
      return static_cast<int64_t>(v);
    }
  }
  return 0;
}

uint32_t width_value(const Slot& s, const ExprContext& ctx) {
  int64_t w = slot_value(s, ctx);
  if (w < 1 || w > kMaxWidth) throw EvalError(fmt::format("width {} out of range", w));
  return static_cast<uint32_t>(w);
}

Signage sign_of(const Slot& s, const ExprContext& ctx) {
  int64_t v = slot_value(s, ctx);
  if (v != 0 && v != 1) throw EvalError(fmt::format("signage {} is not 0 or 1", v));
  return v ? Signage::Signed : Signage::Unsigned;
}

uint32_t index_value(const Slot& s, const ExprContext& ctx) {
  int64_t v = slot_value(s, ctx);
  if (v < 0 || v > 4 * kMaxWidth) throw EvalError(fmt::format("slice index {} out of range", v));
  return static_cast<uint32_t>(v);
}

bool cond_holds(const Rule& r, const ExprContext& ctx) {
  if (!r.cond) return true;
  try {
    return eval_expr(*r.cond, ctx) != 0;
  } catch (const EvalError&) {
    return false;
  }
}

// ---- e-graph matching ----

class Matcher {
 public:
  Matcher(const EGraph& g) : g_(g) {}

  using Cont = std::function<void(Subst&)>;

  void match(const Pattern& p, Id cls, Subst& s, const Cont& k) const {
    cls = g_.find(cls);
    if (p.kind == Pattern::Kind::ClassVar) {
      auto it = s.classes.find(p.var);
      if (it != s.classes.end()) {
        if (g_.find(it->second) == cls) k(s);
        return;
      }
      s.classes.emplace(p.var, cls);
      k(s);
      s.classes.erase(p.var);
      return;
    }
    const EClass& c = g_.eclass(cls);
    for (const ENode& n : c.nodes) {
      if (p.kind == Pattern::Kind::Const) {
        if (n.kind != TermKind::Const) continue;
        Subst t = s;
        if (!bind_slot(p.out_width, n.out.width, t.params) || !bind_slot(p.out_sign, sign_value(n.out.sign), t.params) ||
            !bind_slot(p.value, n.value, t.params)) {
          continue;
        }
        k(t);
        continue;
      }
      if (n.kind != TermKind::Op || n.spec.op != p.op) continue;
      Subst t = s;
      if (!bind_slot(p.out_width, n.out.width, t.params) || !bind_slot(p.out_sign, sign_value(n.out.sign), t.params)) {
        continue;
      }
      if (p.op == Opcode::Slice &&
          (!bind_slot(p.hi, n.spec.hi, t.params) || !bind_slot(p.lo, n.spec.lo, t.params))) {
        continue;
      }
      bool ok = true;
      for (size_t i = 0; i < p.children.size() && ok; ++i) {
        ok = bind_slot(p.operand_width[i], n.operand_anns[i].width, t.params) &&
             bind_slot(p.operand_sign[i], sign_value(n.operand_anns[i].sign), t.params);
      }
      if (!ok) continue;
      children(p, n, 0, t, k);
    }
  }

 private:
  const EGraph& g_;

  void children(const Pattern& p, const ENode& n, size_t i, Subst& s, const Cont& k) const {
    if (i == p.children.size()) {
      k(s);
      return;
    }
    match(p.children[i], n.children[i], s, [&](Subst& t) { children(p, n, i + 1, t, k); });
  }
};

ExprContext graph_context(const EGraph& g, const Subst& s) {
  ExprContext ctx;
  ctx.params = &s.params;
  ctx.class_info = [&g, &s](const std::string& var) -> std::pair<Annotation, Range> {
    auto it = s.classes.find(var);
    if (it == s.classes.end()) throw EvalError(fmt::format("unbound variable '?{}'", var));
    const EClass& c = g.eclass(it->second);
    return {c.out, c.interval};
  };
  return ctx;
}

// A pattern with every slot evaluated, ready to be added to a graph.
struct Resolved {
  bool leaf = false;
  Id leaf_id = 0;
  ENode node;
  std::vector<Resolved> children;
};

// Checks the node shape through the IR constructors.
void check_node(const ENode& n) {
  if (n.kind == TermKind::Const) {
    make_const(n.value, n.out);
    return;
  }
  std::vector<Operand> ops;
  for (const auto& a : n.operand_anns) ops.push_back({a, make_const(0, a)});
  make_op(n.spec, n.out, std::move(ops));
}

Resolved resolve(const Pattern& p, const Subst& s, const ExprContext& ctx) {
  Resolved r;
  if (p.kind == Pattern::Kind::ClassVar) {
    r.leaf = true;
    r.leaf_id = s.classes.at(p.var);
    return r;
  }
  ENode& n = r.node;
  n.out = {width_value(p.out_width, ctx), sign_of(p.out_sign, ctx)};
  if (p.kind == Pattern::Kind::Const) {
    n.kind = TermKind::Const;
    n.value = slot_value(p.value, ctx);
    check_node(n);
    return r;
  }
  n.kind = TermKind::Op;
  n.spec = {p.op, 0, 0};
  if (p.op == Opcode::Slice) n.spec = {p.op, index_value(p.hi, ctx), index_value(p.lo, ctx)};
  for (size_t i = 0; i < p.children.size(); ++i) {
    n.operand_anns.push_back({width_value(p.operand_width[i], ctx), sign_of(p.operand_sign[i], ctx)});
    r.children.push_back(resolve(p.children[i], s, ctx));
  }
  check_node(n);
  return r;
}

Id add_resolved(EGraph& g, const Resolved& r) {
  if (r.leaf) return g.find(r.leaf_id);
  ENode n = r.node;
  for (const auto& c : r.children) n.children.push_back(add_resolved(g, c));
  return g.add(n);
}

Annotation resolved_out(const EGraph& g, const Resolved& r) { return r.leaf ? g.eclass(r.leaf_id).out : r.node.out; }

// ---- term matching ----

Range term_interval(const TermPtr& t) {
  ENode n;
  n.kind = t->kind;
  n.out = t->out;
  n.value = t->value;
  n.name = t->name;
  n.spec = t->spec;
  std::vector<Range> child;
  for (const auto& o : t->operands) {
    n.operand_anns.push_back(o.ann);
    n.children.push_back(0);
    child.push_back(term_interval(o.term));
  }
  return interval_make(n, child);
}

bool match_term_rec(const Pattern& p, const TermPtr& t, TermSubst& s) {
  if (p.kind == Pattern::Kind::ClassVar) {
    auto [it, fresh] = s.vars.emplace(p.var, t);
    return fresh || terms_equal(it->second, t);
  }
  if (!bind_slot(p.out_width, t->out.width, s.params) || !bind_slot(p.out_sign, sign_value(t->out.sign), s.params)) {
    return false;
  }
  if (p.kind == Pattern::Kind::Const) return t->is_const() && bind_slot(p.value, t->value, s.params);
  if (!t->is_op() || t->spec.op != p.op) return false;
  if (p.op == Opcode::Slice && (!bind_slot(p.hi, t->spec.hi, s.params) || !bind_slot(p.lo, t->spec.lo, s.params))) {
    return false;
  }
  for (size_t i = 0; i < p.children.size(); ++i) {
    const Operand& o = t->operands[i];
    if (!bind_slot(p.operand_width[i], o.ann.width, s.params) ||
        !bind_slot(p.operand_sign[i], sign_value(o.ann.sign), s.params) || !match_term_rec(p.children[i], o.term, s)) {
      return false;
    }
  }
  return true;
}

ExprContext term_context(const TermSubst& s) {
  ExprContext ctx;
  ctx.params = &s.params;
  ctx.class_info = [&s](const std::string& var) -> std::pair<Annotation, Range> {
    auto it = s.vars.find(var);
    if (it == s.vars.end()) throw EvalError(fmt::format("unbound variable '?{}'", var));
    return {it->second->out, term_interval(it->second)};
  };
  return ctx;
}

TermPtr instantiate_with(const Pattern& p, const TermSubst& s, const ExprContext& ctx) {
  if (p.kind == Pattern::Kind::ClassVar) {
    auto it = s.vars.find(p.var);
    if (it == s.vars.end()) throw EvalError(fmt::format("unbound variable '?{}'", p.var));
    return it->second;
  }
  Annotation out{width_value(p.out_width, ctx), sign_of(p.out_sign, ctx)};
  if (p.kind == Pattern::Kind::Const) return make_const(slot_value(p.value, ctx), out);
  OpSpec spec{p.op, 0, 0};
  if (p.op == Opcode::Slice) spec = {p.op, index_value(p.hi, ctx), index_value(p.lo, ctx)};
  std::vector<Operand> ops;
  for (size_t i = 0; i < p.children.size(); ++i) {
    ops.push_back({{width_value(p.operand_width[i], ctx), sign_of(p.operand_sign[i], ctx)},
                   instantiate_with(p.children[i], s, ctx)});
  }
  return make_op(spec, out, std::move(ops));
}

// ---- validation ----

// Operand annotation slots under which each variable occurs, in pattern order.
void var_slots(const Pattern& p, std::map<std::string, std::vector<std::pair<const Slot*, const Slot*>>>& out) {
  for (size_t i = 0; i < p.children.size(); ++i) {
    const Pattern& c = p.children[i];
    if (c.kind == Pattern::Kind::ClassVar) {
      out[c.var].push_back({&p.operand_width[i], &p.operand_sign[i]});
    } else {
      var_slots(c, out);
    }
  }
}

bool slot_equal(const Slot& a, const Slot& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Slot::Kind::Lit) return a.lit == b.lit;
  if (a.kind == Slot::Kind::Param) return a.param == b.param;
  return format_expr(*a.expr) == format_expr(*b.expr);
}

void conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::Binary && e->name == "&&") {
    conjuncts(e->args[0], out);
    conjuncts(e->args[1], out);
    return;
  }
  out.push_back(e);
}

struct Domain {
  std::string name;
  ParamRole role;
  Slot const_width, const_sign;
};

// Parameters and class-annotation pseudo-parameters an expression reads.
void expr_names(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Param) out.push_back(e.name);
  if (e.kind == Expr::Kind::Call && (e.name == "cw" || e.name == "cs" || e.name == "clo" || e.name == "chi")) {
    out.push_back("cw:" + e.args[0]->name);
    out.push_back("cs:" + e.args[0]->name);
    return;
  }
  for (const auto& a : e.args) expr_names(*a, out);
}

// Binds the parameters of each conjunct together, in conjunct order, so that
// pruning starts as early as possible. Constant values follow their annotation.
std::vector<Domain> order_domains(std::vector<Domain> domains, const std::vector<ExprPtr>& parts) {
  std::vector<Domain> out;
  std::set<std::string> placed;
  std::function<void(const std::string&)> place = [&](const std::string& name) {
    if (placed.count(name)) return;
    auto it = std::find_if(domains.begin(), domains.end(), [&](const Domain& d) { return d.name == name; });
    if (it == domains.end()) return;
    placed.insert(name);
    Domain d = *it;
    if (d.role == ParamRole::ConstValue) {
      for (const Slot* s : {&d.const_width, &d.const_sign}) {
        if (s->kind == Slot::Kind::Param) place(s->param);
      }
    }
    out.push_back(std::move(d));
  };
  for (const auto& c : parts) {
    std::vector<std::string> names;
    expr_names(*c, names);
    for (const auto& n : names) place(n);
  }
  for (const auto& d : domains) place(d.name);
  return out;
}

}  // namespace

const std::string& catalogue_text() {
  static const std::string text = kCatalogue;
  return text;
}

const std::vector<Rule>& catalogue() {
  static const std::vector<Rule> rules = parse_rules(catalogue_text());
  return rules;
}

std::vector<Rule> default_rules() {
  std::vector<Rule> out;
  for (const auto& r : catalogue()) {
    if (r.saturate) out.push_back(r);
  }
  return out;
}

const Rule* find_rule(const std::vector<Rule>& rules, const std::string& id) {
  for (const auto& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<Match> match_rule(const EGraph& g, const Rule& r, size_t rule_index) {
  std::vector<Match> out;
  Matcher m(g);
  for (const auto& [id, c] : g.classes()) {
    Subst s;
    m.match(r.lhs, id, s, [&](Subst& t) {
      if (cond_holds(r, graph_context(g, t))) out.push_back({rule_index, id, t});
    });
  }
  return out;
}

ApplyOutcome apply_match(EGraph& g, const Rule& r, const Match& m) {
  Resolved lhs, rhs;
  try {
    ExprContext ctx = graph_context(g, m.subst);
    lhs = resolve(r.lhs, m.subst, ctx);
    rhs = resolve(r.rhs, m.subst, ctx);
    if (resolved_out(g, lhs) != resolved_out(g, rhs)) return ApplyOutcome::Failed;
  } catch (const EvalError&) {
    return ApplyOutcome::Failed;
  } catch (const IrError&) {
    return ApplyOutcome::Failed;
  }
  Id a = add_resolved(g, lhs);
  Id b = add_resolved(g, rhs);
  return g.merge(a, b, Justification::by_rule(r.id, m.subst.params)) ? ApplyOutcome::Merged
                                                                      : ApplyOutcome::AlreadyEqual;
}

std::optional<TermSubst> match_term(const Rule& r, const TermPtr& t) {
  TermSubst s;
  if (!match_term_rec(r.lhs, t, s)) return std::nullopt;
  if (!cond_holds(r, term_context(s))) return std::nullopt;
  return s;
}

std::optional<TermSubst> match_pattern(const Pattern& p, const TermPtr& t) {
  TermSubst s;
  if (!match_term_rec(p, t, s)) return std::nullopt;
  return s;
}

TermPtr instantiate(const Pattern& p, const TermSubst& s) { return instantiate_with(p, s, term_context(s)); }

std::optional<TermPtr> rewrite_root(const Rule& r, const TermPtr& t) {
  auto s = match_term(r, t);
  if (!s) return std::nullopt;
  try {
    TermPtr out = instantiate(r.rhs, *s);
    if (out->out != t->out) return std::nullopt;
    return out;
  } catch (const EvalError&) {
    return std::nullopt;
  } catch (const IrError&) {
    return std::nullopt;
  }
}

std::vector<Violation> validate_rule(const Rule& r, const ValidationOptions& opt) {
  std::vector<Violation> out;
  std::vector<std::string> vars = class_variables(r.lhs);

  std::map<std::string, std::vector<std::pair<const Slot*, const Slot*>>> lhs_slots, rhs_slots;
  var_slots(r.lhs, lhs_slots);
  var_slots(r.rhs, rhs_slots);

  // A variable whose coercions agree on both sides only ever contributes values
  // of that operand annotation, so fixing its class annotation loses nothing.
  // Otherwise the class annotation is enumerated as well.
  std::vector<Domain> domains;
  for (const auto& u : lhs_parameters(r.lhs)) domains.push_back({u.name, u.role, u.const_width, u.const_sign});
  std::map<std::string, bool> free_ann;
  for (const auto& v : vars) {
    bool vary = r.cond && mentions_class(*r.cond, v);
    const auto& first = lhs_slots[v].front();
    auto same_as_first = [&](const std::pair<const Slot*, const Slot*>& s) {
      return slot_equal(*s.first, *first.first) && slot_equal(*s.second, *first.second);
    };
    for (const auto& s : lhs_slots[v]) vary = vary || !same_as_first(s);
    for (const auto& s : rhs_slots[v]) vary = vary || !same_as_first(s);
    if (r.rhs.kind == Pattern::Kind::ClassVar && r.rhs.var == v) vary = true;
    free_ann[v] = vary;
    if (vary) {
      domains.push_back({"cw:" + v, ParamRole::Width, {}, {}});
      domains.push_back({"cs:" + v, ParamRole::Sign, {}, {}});
    }
  }

  Params params;
  ExprContext pctx;
  pctx.params = &params;
  auto var_annotation = [&](const std::string& v) -> Annotation {
    if (free_ann[v]) {
      auto w = params.find("cw:" + v), s = params.find("cs:" + v);
      if (w == params.end() || s == params.end()) throw EvalError("class annotation not chosen yet");
      return {static_cast<uint32_t>(w->second), s->second ? Signage::Signed : Signage::Unsigned};
    }
    const auto& first = lhs_slots[v].front();
    return {width_value(*first.first, pctx), sign_of(*first.second, pctx)};
  };
  pctx.class_info = [&](const std::string& v) -> std::pair<Annotation, Range> {
    Annotation a = var_annotation(v);
    return {a, full_range(a)};
  };

  // Conjuncts are checked as soon as their parameters are bound.
  std::vector<ExprPtr> parts;
  if (r.cond) conjuncts(r.cond, parts);
  domains = order_domains(std::move(domains), parts);
  auto refuted = [&]() {
    for (const auto& c : parts) {
      try {
        if (eval_expr(*c, pctx) == 0) return true;
      } catch (const EvalError&) {
      } catch (const IrError&) {
      }
    }
    return false;
  };

  auto check = [&]() {
    TermSubst s;
    s.params = params;
    std::vector<std::string> names;
    std::vector<Annotation> anns;
    try {
      for (const auto& v : vars) {
        Annotation a = var_annotation(v);
        s.vars[v] = make_var(v, a);
        names.push_back(v);
        anns.push_back(a);
      }
    } catch (const Error&) {
      return;
    }
    for (const auto& v : vars) s.params.erase("cw:" + v), s.params.erase("cs:" + v);
    ExprContext ctx = term_context(s);
    if (!cond_holds(r, ctx)) return;
    TermPtr lhs, rhs;
    try {
      lhs = instantiate_with(r.lhs, s, ctx);
    } catch (const Error&) {
      return;  // no graph node has this shape
    }
    try {
      rhs = instantiate_with(r.rhs, s, ctx);
    } catch (const Error&) {
      return;  // application fails without merging
    }
    Violation base;
    base.params = params;
    base.lhs = format_term(lhs);
    base.rhs = format_term(rhs);
    if (lhs->out != rhs->out) {
      base.reason = "output annotations differ";
      out.push_back(base);
      return;
    }
    CompiledTerm cl(lhs, names), cr(rhs, names);
    std::vector<int64_t> in(anns.size());
    for (size_t i = 0; i < anns.size(); ++i) in[i] = min_value(anns[i]);
    while (true) {
      int64_t x = cl.eval(in), y = cr.eval(in);
      if (x != y) {
        Violation v = base;
        for (size_t i = 0; i < in.size(); ++i) v.inputs.push_back({names[i], in[i]});
        v.lhs_value = x;
        v.rhs_value = y;
        v.reason = "values differ";
        out.push_back(std::move(v));
        return;
      }
      size_t i = 0;
      for (; i < in.size(); ++i) {
        if (in[i] < max_value(anns[i])) {
          ++in[i];
          break;
        }
        in[i] = min_value(anns[i]);
      }
      if (i == in.size()) break;
    }
  };

  std::function<void(size_t)> go = [&](size_t i) {
    if (out.size() >= opt.max_violations || refuted()) return;
    if (i == domains.size()) {
      check();
      return;
    }
    const Domain& d = domains[i];
    int64_t lo = 0, hi = 0;
    switch (d.role) {
      case ParamRole::Width:
        lo = 1, hi = opt.max_width;
        break;
      case ParamRole::ShiftWidth:
        lo = 1, hi = std::min(opt.max_shift_width, opt.max_width);
        break;
      case ParamRole::Sign:
        lo = 0, hi = 1;
        break;
      case ParamRole::SliceIndex:
        lo = 0, hi = opt.max_width;
        break;
      case ParamRole::ConstValue:
        try {
          Annotation a{width_value(d.const_width, pctx), sign_of(d.const_sign, pctx)};
          lo = min_value(a), hi = max_value(a);
        } catch (const Error&) {
          return;
        }
        break;
    }
    for (int64_t v = lo; v <= hi; ++v) {
      params[d.name] = v;
      go(i + 1);
    }
    params.erase(d.name);
  };
  go(0);
  return out;
}

}  // namespace wlec
