#include "wlec/ir.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace wlec {

namespace {

struct OpInfo {
  Opcode op;
  std::string_view name;
  size_t arity;
};

constexpr OpInfo kOpTable[] = {
    {Opcode::Add, "+", 2},       {Opcode::Sub, "-", 2},      {Opcode::Mul, "*", 2},
    {Opcode::Neg, "neg", 1},     {Opcode::Shl, "<<", 2},     {Opcode::Shr, ">>", 2},
    {Opcode::Sra, ">>>", 2},     {Opcode::And, "&", 2},      {Opcode::Or, "|", 2},
    {Opcode::Xor, "^", 2},       {Opcode::Not, "~", 1},      {Opcode::Mux, "mux", 3},
    {Opcode::Concat, "concat", 2}, {Opcode::Slice, "slice", 1}, {Opcode::Eq, "==", 2},
    {Opcode::Lt, "<", 2},        {Opcode::Zext, "zext", 1},  {Opcode::Sext, "sext", 1},
};

const OpInfo& info(Opcode op) {
  for (const auto& i : kOpTable) {
    if (i.op == op) return i;
  }
  throw IrError("unknown opcode");
}

uint64_t low_mask(uint32_t w) { return w >= 64 ? ~uint64_t{0} : (uint64_t{1} << w) - 1; }

Wide pow2(uint32_t e) { return Wide{1} << e; }

std::optional<Wide> checked_mul(Wide a, Wide b) {
  Wide r;
  if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
  return r;
}

std::optional<Wide> checked_add(Wide a, Wide b) {
  Wide r;
  if (__builtin_add_overflow(a, b, &r)) return std::nullopt;
  return r;
}

// floor(v / 2^s) for s < 127.
Wide floor_shift(Wide v, uint32_t s) { return v >> s; }

void hash_combine(size_t& seed, size_t v) { seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2); }

}  // namespace

std::string_view to_string(Signage s) { return s == Signage::Signed ? "signed" : "unsigned"; }

std::optional<Signage> signage_from_string(std::string_view s) {
  if (s == "unsigned") return Signage::Unsigned;
  if (s == "signed") return Signage::Signed;
  return std::nullopt;
}

int64_t min_value(Annotation a) {
  assert(valid_annotation(a));
  return a.is_signed() ? -(int64_t{1} << (a.width - 1)) : 0;
}

int64_t max_value(Annotation a) {
  assert(valid_annotation(a));
  return a.is_signed() ? (int64_t{1} << (a.width - 1)) - 1 : (int64_t{1} << a.width) - 1;
}

bool valid_annotation(Annotation a) { return a.width >= 1 && a.width <= kMaxWidth; }

bool representable(Wide v, Annotation a) {
  if (!valid_annotation(a)) return false;
  return v >= min_value(a) && v <= max_value(a);
}

Range full_range(Annotation a) { return {min_value(a), max_value(a)}; }

Annotation min_annotation(Wide lo, Wide hi) {
  assert(lo <= hi);
  if (lo >= 0) {
    uint32_t w = 1;
    while (w < 127 && hi >= pow2(w)) ++w;
    return unsigned_of(w);
  }
  uint32_t w = 1;
  while (w < 127 && (lo < -pow2(w - 1) || hi > pow2(w - 1) - 1)) ++w;
  return signed_of(w);
}

std::string_view to_string(Opcode op) { return info(op).name; }

std::optional<Opcode> opcode_from_string(std::string_view s) {
  for (const auto& i : kOpTable) {
    if (i.name == s) return i.op;
  }
  return std::nullopt;
}

size_t arity(Opcode op) { return info(op).arity; }

bool is_shift(Opcode op) { return op == Opcode::Shl || op == Opcode::Shr || op == Opcode::Sra; }

TermPtr make_var(std::string name, Annotation out) {
  if (!valid_annotation(out)) throw IrError(fmt::format("invalid width {} for variable '{}'", out.width, name));
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Var;
  t->name = std::move(name);
  t->out = out;
  return t;
}

TermPtr make_const(int64_t value, Annotation out) {
  if (!valid_annotation(out)) throw IrError(fmt::format("invalid constant width {}", out.width));
  if (!representable(value, out)) {
    throw IrError(fmt::format("constant {} out of range for {} {}", value, out.width, to_string(out.sign)));
  }
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Const;
  t->value = value;
  t->out = out;
  return t;
}

TermPtr make_op(OpSpec spec, Annotation out, std::vector<Operand> operands) {
  if (!valid_annotation(out)) {
    throw IrError(fmt::format("invalid output width {} for '{}'", out.width, to_string(spec.op)));
  }
  if (operands.size() != arity(spec.op)) {
    throw IrError(fmt::format("'{}' expects {} operands, got {}", to_string(spec.op), arity(spec.op),
                              operands.size()));
  }
  for (const auto& o : operands) {
    if (!o.term) throw IrError("null operand");
    if (!valid_annotation(o.ann)) {
      throw IrError(fmt::format("invalid operand width {} for '{}'", o.ann.width, to_string(spec.op)));
    }
  }
  if (spec.op == Opcode::Slice) {
    if (spec.hi < spec.lo) throw IrError(fmt::format("slice [{}:{}] has hi < lo", spec.hi, spec.lo));
  } else {
    spec.hi = spec.lo = 0;
  }
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Op;
  t->spec = spec;
  t->out = out;
  t->operands = std::move(operands);
  return t;
}

bool terms_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->out != b->out) return false;
  switch (a->kind) {
    case TermKind::Var:
      return a->name == b->name;
    case TermKind::Const:
      return a->value == b->value;
    case TermKind::Op:
      if (!(a->spec == b->spec) || a->operands.size() != b->operands.size()) return false;
      for (size_t i = 0; i < a->operands.size(); ++i) {
        if (a->operands[i].ann != b->operands[i].ann) return false;
        if (!terms_equal(a->operands[i].term, b->operands[i].term)) return false;
      }
      return true;
  }
  return false;
}

size_t term_hash(const TermPtr& t) {
  std::unordered_map<const Term*, size_t> memo;
  std::function<size_t(const Term*)> go = [&](const Term* n) -> size_t {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    size_t h = static_cast<size_t>(n->kind);
    hash_combine(h, n->out.width);
    hash_combine(h, static_cast<size_t>(n->out.sign));
    switch (n->kind) {
      case TermKind::Var:
        hash_combine(h, std::hash<std::string>{}(n->name));
        break;
      case TermKind::Const:
        hash_combine(h, std::hash<int64_t>{}(n->value));
        break;
      case TermKind::Op:
        hash_combine(h, static_cast<size_t>(n->spec.op));
        hash_combine(h, n->spec.hi);
        hash_combine(h, n->spec.lo);
        for (const auto& o : n->operands) {
          hash_combine(h, o.ann.width * 2 + static_cast<size_t>(o.ann.sign));
          hash_combine(h, go(o.term.get()));
        }
        break;
    }
    memo.emplace(n, h);
    return h;
  };
  return go(t.get());
}

uint64_t tree_size(const TermPtr& t) {
  std::unordered_map<const Term*, uint64_t> memo;
  std::function<uint64_t(const Term*)> go = [&](const Term* n) -> uint64_t {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    uint64_t s = 1;
    for (const auto& o : n->operands) s = std::min<uint64_t>(s + go(o.term.get()), UINT64_MAX / 4);
    memo.emplace(n, s);
    return s;
  };
  return go(t.get());
}

size_t dag_size(const TermPtr& t) {
  std::unordered_set<std::string> seen;
  std::unordered_set<const Term*> visited;
  std::function<void(const TermPtr&)> go = [&](const TermPtr& n) {
    if (!visited.insert(n.get()).second) return;
    seen.insert(format_term(n));
    for (const auto& o : n->operands) go(o.term);
  };
  go(t);
  return seen.size();
}

std::vector<std::string> free_variables(const TermPtr& t) {
  std::vector<std::string> out;
  std::unordered_set<const Term*> visited;
  std::function<void(const Term*)> go = [&](const Term* n) {
    if (!visited.insert(n).second) return;
    if (n->is_var() && std::find(out.begin(), out.end(), n->name) == out.end()) out.push_back(n->name);
    for (const auto& o : n->operands) go(o.term.get());
  };
  go(t.get());
  return out;
}

std::string format_term(const TermPtr& t) {
  std::string s;
  std::function<void(const Term&)> go = [&](const Term& n) {
    auto ann = [&](Annotation a) { s += fmt::format("{} {}", a.width, to_string(a.sign)); };
    switch (n.kind) {
      case TermKind::Var:
        s += fmt::format("(var {} ", n.name);
        ann(n.out);
        s += ')';
        return;
      case TermKind::Const:
        s += fmt::format("(const {} ", n.value);
        ann(n.out);
        s += ')';
        return;
      case TermKind::Op:
        s += '(';
        s += to_string(n.spec.op);
        s += ' ';
        ann(n.out);
        if (n.spec.op == Opcode::Slice) s += fmt::format(" {} {}", n.spec.hi, n.spec.lo);
        for (const auto& o : n.operands) {
          s += ' ';
          ann(o.ann);
          s += ' ';
          go(*o.term);
        }
        s += ')';
        return;
    }
  };
  go(*t);
  return s;
}

TermPtr subterm_at(const TermPtr& t, const Position& pos) {
  TermPtr cur = t;
  for (uint32_t i : pos) {
    if (i >= cur->operands.size()) throw IrError("position " + format_position(pos) + " out of range");
    cur = cur->operands[i].term;
  }
  return cur;
}

TermPtr replace_at(const TermPtr& t, const Position& pos, TermPtr replacement) {
  std::function<TermPtr(const TermPtr&, size_t)> go = [&](const TermPtr& cur, size_t depth) -> TermPtr {
    if (depth == pos.size()) return replacement;
    uint32_t i = pos[depth];
    if (i >= cur->operands.size()) throw IrError("position " + format_position(pos) + " out of range");
    auto n = std::make_shared<Term>(*cur);
    n->operands[i].term = go(cur->operands[i].term, depth + 1);
    return n;
  };
  return go(t, 0);
}

std::string format_position(const Position& pos) {
  std::string s = "[";
  for (size_t i = 0; i < pos.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(pos[i]);
  }
  return s + "]";
}

void Environment::bind(const std::string& name, Annotation ann, int64_t value) {
  if (!representable(value, ann)) {
    throw IrError(fmt::format("value {} not representable for input '{}'", value, name));
  }
  bindings_[name] = {ann, value};
}

const std::pair<Annotation, int64_t>* Environment::find(const std::string& name) const {
  auto it = bindings_.find(name);
  return it == bindings_.end() ? nullptr : &it->second;
}

int64_t wrap_pattern(uint64_t pattern, Annotation a) {
  uint64_t m = pattern & low_mask(a.width);
  if (a.is_signed() && a.width < 64 && ((m >> (a.width - 1)) & 1)) m |= ~low_mask(a.width);
  return static_cast<int64_t>(m);
}

int64_t coerce(int64_t value, Annotation from, Annotation to) {
  (void)from;  // values carry their sign already; extension per `from` is implicit
  return wrap_pattern(static_cast<uint64_t>(value), to);
}

int64_t apply_op(const OpSpec& spec, Annotation out, std::span<const Annotation> ops,
                 std::span<const int64_t> args) {
  auto u = [&](size_t i) { return static_cast<uint64_t>(args[i]); };
  auto amount = [&](size_t i) { return u(i) & low_mask(ops[i].width); };
  uint64_t r = 0;
  switch (spec.op) {
    case Opcode::Add: r = u(0) + u(1); break;
    case Opcode::Sub: r = u(0) - u(1); break;
    case Opcode::Mul: r = u(0) * u(1); break;
    case Opcode::Neg: r = uint64_t{0} - u(0); break;
    case Opcode::Shl: {
      uint64_t s = amount(1);
      r = s >= 64 ? 0 : u(0) << s;
      break;
    }
    case Opcode::Shr: {
      uint64_t s = amount(1);
      r = s >= 64 ? 0 : (u(0) & low_mask(ops[0].width)) >> s;
      break;
    }
    case Opcode::Sra: {
      uint64_t s = std::min<uint64_t>(amount(1), 63);
      r = static_cast<uint64_t>(args[0] >> s);
      break;
    }
    case Opcode::And: r = u(0) & u(1); break;
    case Opcode::Or: r = u(0) | u(1); break;
    case Opcode::Xor: r = u(0) ^ u(1); break;
    case Opcode::Not: r = ~u(0); break;
    case Opcode::Mux: r = args[0] != 0 ? u(1) : u(2); break;
    case Opcode::Concat:
      r = ((u(0) & low_mask(ops[0].width)) << ops[1].width) | (u(1) & low_mask(ops[1].width));
      break;
    case Opcode::Slice: {
      uint32_t lo = std::min<uint32_t>(spec.lo, 63);
      r = static_cast<uint64_t>(args[0] >> lo) & low_mask(spec.hi - spec.lo + 1);
      break;
    }
    case Opcode::Eq: r = args[0] == args[1] ? 1 : 0; break;
    case Opcode::Lt: r = args[0] < args[1] ? 1 : 0; break;
    case Opcode::Zext: r = u(0) & low_mask(ops[0].width); break;
    case Opcode::Sext: r = static_cast<uint64_t>(wrap_pattern(u(0), signed_of(ops[0].width))); break;
  }
  return wrap_pattern(r, out);
}

int64_t evaluate(const TermPtr& t, const Environment& env) {
  std::unordered_map<const Term*, int64_t> memo;
  std::function<int64_t(const Term&)> go = [&](const Term& n) -> int64_t {
    if (auto it = memo.find(&n); it != memo.end()) return it->second;
    int64_t v = 0;
    switch (n.kind) {
      case TermKind::Var: {
        const auto* b = env.find(n.name);
        if (!b) throw UnboundVariable(n.name);
        v = coerce(b->second, b->first, n.out);
        break;
      }
      case TermKind::Const:
        v = n.value;
        break;
      case TermKind::Op: {
        int64_t args[3];
        Annotation anns[3];
        for (size_t i = 0; i < n.operands.size(); ++i) {
          const auto& o = n.operands[i];
          args[i] = coerce(go(*o.term), o.term->out, o.ann);
          anns[i] = o.ann;
        }
        size_t k = n.operands.size();
        v = apply_op(n.spec, n.out, std::span(anns, k), std::span(args, k));
        break;
      }
    }
    memo.emplace(&n, v);
    return v;
  };
  return go(*t);
}

std::optional<Range> exact_range(const OpSpec& spec, std::span<const Annotation> ops,
                                 std::span<const Range> args) {
  auto corners = [](std::initializer_list<std::optional<Wide>> vs) -> std::optional<Range> {
    Range r{0, 0};
    bool first = true;
    for (const auto& v : vs) {
      if (!v) return std::nullopt;
      if (first || *v < r.lo) r.lo = *v;
      if (first || *v > r.hi) r.hi = *v;
      first = false;
    }
    return r;
  };
  const Range& a = args[0];
  switch (spec.op) {
    case Opcode::Add: {
      auto lo = checked_add(a.lo, args[1].lo);
      auto hi = checked_add(a.hi, args[1].hi);
      if (!lo || !hi) return std::nullopt;
      return Range{*lo, *hi};
    }
    case Opcode::Sub: {
      auto lo = checked_add(a.lo, -args[1].hi);
      auto hi = checked_add(a.hi, -args[1].lo);
      if (!lo || !hi) return std::nullopt;
      return Range{*lo, *hi};
    }
    case Opcode::Mul: {
      const Range& b = args[1];
      return corners({checked_mul(a.lo, b.lo), checked_mul(a.lo, b.hi), checked_mul(a.hi, b.lo),
                      checked_mul(a.hi, b.hi)});
    }
    case Opcode::Neg:
      return Range{-a.hi, -a.lo};
    case Opcode::Not:
      return Range{-a.hi - 1, -a.lo - 1};
    case Opcode::Shl: {
      // Shift amounts read the unsigned bit pattern of the amount operand.
      Range s = args[1];
      if (s.lo < 0) s = {0, pow2(ops[1].width) - 1};
      if (s.hi > 120) {
        if (a.lo == 0 && a.hi == 0) return Range{0, 0};
        return std::nullopt;
      }
      auto sh = [&](Wide v, Wide k) { return checked_mul(v, pow2(static_cast<uint32_t>(k))); };
      return corners({sh(a.lo, s.lo), sh(a.lo, s.hi), sh(a.hi, s.lo), sh(a.hi, s.hi)});
    }
    case Opcode::Shr: {
      Range s = args[1];
      if (s.lo < 0) s = {0, pow2(ops[1].width) - 1};
      Range p = a;
      if (a.lo < 0) p = {0, pow2(ops[0].width) - 1};
      uint32_t smin = static_cast<uint32_t>(std::min<Wide>(s.lo, 126));
      uint32_t smax = static_cast<uint32_t>(std::min<Wide>(s.hi, 126));
      return Range{floor_shift(p.lo, smax), floor_shift(p.hi, smin)};
    }
    case Opcode::Sra: {
      Range s = args[1];
      if (s.lo < 0) s = {0, pow2(ops[1].width) - 1};
      uint32_t smin = static_cast<uint32_t>(std::min<Wide>(s.lo, 126));
      uint32_t smax = static_cast<uint32_t>(std::min<Wide>(s.hi, 126));
      return corners({floor_shift(a.lo, smin), floor_shift(a.lo, smax), floor_shift(a.hi, smin),
                      floor_shift(a.hi, smax)});
    }
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor: {
      const Range& b = args[1];
      if (spec.op == Opcode::And && (a.lo >= 0 || b.lo >= 0)) {
        Wide hi = a.lo >= 0 && b.lo >= 0 ? std::min(a.hi, b.hi) : (a.lo >= 0 ? a.hi : b.hi);
        return Range{0, hi};
      }
      Annotation ea = min_annotation(a.lo, a.hi);
      Annotation eb = min_annotation(b.lo, b.hi);
      if (!ea.is_signed() && !eb.is_signed()) {
        return Range{0, pow2(std::max(ea.width, eb.width)) - 1};
      }
      uint32_t w = std::max(ea.width + (ea.is_signed() ? 0 : 1), eb.width + (eb.is_signed() ? 0 : 1));
      return Range{-pow2(w - 1), pow2(w - 1) - 1};
    }
    case Opcode::Mux:
      return Range{std::min(args[1].lo, args[2].lo), std::max(args[1].hi, args[2].hi)};
    case Opcode::Concat:
      return Range{0, pow2(ops[0].width + ops[1].width) - 1};
    case Opcode::Slice:
      return Range{0, pow2(spec.hi - spec.lo + 1) - 1};
    case Opcode::Eq:
    case Opcode::Lt:
      return Range{0, 1};
    case Opcode::Zext:
      if (a.lo >= 0) return a;
      return Range{0, pow2(ops[0].width) - 1};
    case Opcode::Sext:
      if (a.hi < pow2(ops[0].width - 1)) return a;
      return full_range(signed_of(ops[0].width));
  }
  return std::nullopt;
}

Annotation exact_width(const OpSpec& spec, std::span<const Annotation> ops) {
  constexpr uint32_t kHuge = 1u << 30;
  if (spec.op == Opcode::Shl) {
    // a << s grows by up to 2^w_s - 1 bits.
    uint32_t ws = ops[1].width;
    uint64_t grow = ws >= 30 ? kHuge : (uint64_t{1} << ws) - 1;
    uint64_t w = std::min<uint64_t>(ops[0].width + grow, kHuge);
    return {static_cast<uint32_t>(w), ops[0].sign};
  }
  if (spec.op == Opcode::Concat) return unsigned_of(ops[0].width + ops[1].width);
  std::vector<Range> args;
  for (const auto& a : ops) args.push_back(full_range(a));
  auto r = exact_range(spec, ops, args);
  if (!r) throw IrError("exact width overflow");
  return min_annotation(r->lo, r->hi);
}

CompiledTerm::CompiledTerm(const TermPtr& t, std::span<const std::string> inputs) {
  std::unordered_map<const Term*, uint32_t> slot;
  std::function<uint32_t(const Term&)> go = [&](const Term& n) -> uint32_t {
    if (auto it = slot.find(&n); it != slot.end()) return it->second;
    Instr in{n.kind, n.spec, n.out, 0, 0, 0};
    if (n.is_var()) {
      auto it = std::find(inputs.begin(), inputs.end(), n.name);
      if (it == inputs.end()) throw UnboundVariable(n.name);
      in.value = it - inputs.begin();
    } else if (n.is_const()) {
      in.value = n.value;
    } else {
      std::vector<uint32_t> kids;
      for (const auto& o : n.operands) kids.push_back(go(*o.term));
      in.first_arg = static_cast<uint32_t>(arg_slots_.size());
      in.nargs = static_cast<uint32_t>(kids.size());
      for (size_t i = 0; i < kids.size(); ++i) {
        arg_slots_.push_back(kids[i]);
        arg_from_.push_back(n.operands[i].term->out);
        arg_to_.push_back(n.operands[i].ann);
      }
    }
    code_.push_back(in);
    uint32_t id = static_cast<uint32_t>(code_.size() - 1);
    slot.emplace(&n, id);
    return id;
  };
  go(*t);
  scratch_.resize(code_.size());
}

int64_t CompiledTerm::eval(std::span<const int64_t> inputs) const {
  for (size_t pc = 0; pc < code_.size(); ++pc) {
    const Instr& in = code_[pc];
    switch (in.kind) {
      case TermKind::Var:
        scratch_[pc] = wrap_pattern(static_cast<uint64_t>(inputs[in.value]), in.out);
        break;
      case TermKind::Const:
        scratch_[pc] = in.value;
        break;
      case TermKind::Op: {
        int64_t args[3];
        for (uint32_t i = 0; i < in.nargs; ++i) {
          args[i] = wrap_pattern(static_cast<uint64_t>(scratch_[arg_slots_[in.first_arg + i]]),
                                 arg_to_[in.first_arg + i]);
        }
        scratch_[pc] = apply_op(in.spec, in.out, std::span(arg_to_.data() + in.first_arg, in.nargs),
                                std::span(args, in.nargs));
        break;
      }
    }
  }
  return scratch_.back();
}

}  // namespace wlec
