#include "wlec/analysis.hpp"

#include <fmt/format.h>

#include "wlec/egraph.hpp"

namespace wlec {

namespace {

bool fits(const Range& r, Annotation a) { return representable(r.lo, a) && representable(r.hi, a); }

std::string wide_text(Wide v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  } while (u != 0);
  return neg ? "-" + s : s;
}

// Narrowest width of the given signage holding the whole range.
uint32_t min_width(const Range& r, Signage s) {
  for (uint32_t w = 1; w <= kMaxWidth; ++w) {
    if (fits(r, {w, s})) return w;
  }
  return kMaxWidth + 1;
}

}  // namespace

std::string format_range(const Range& r) { return fmt::format("[{}, {}]", wide_text(r.lo), wide_text(r.hi)); }

Range interval_make(const ENode& n, std::span<const Range> child_ranges) {
  switch (n.kind) {
    case TermKind::Var:
      return full_range(n.out);
    case TermKind::Const:
      return {n.value, n.value};
    case TermKind::Op:
      break;
  }
  std::vector<Range> ops;
  ops.reserve(child_ranges.size());
  for (size_t i = 0; i < child_ranges.size(); ++i) {
    const Annotation& a = n.operand_anns[i];
    ops.push_back(fits(child_ranges[i], a) ? child_ranges[i] : full_range(a));
  }
  auto r = exact_range(n.spec, n.operand_anns, ops);
  if (r && fits(*r, n.out)) return *r;
  return full_range(n.out);
}

Range interval_merge(const Range& a, const Range& b) {
  Range r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) {
    throw Error(fmt::format("interval analysis: {} and {} are disjoint; an unsound union was made", format_range(a),
                            format_range(b)));
  }
  return r;
}

size_t width_reduction_pass(EGraph& g) {
  struct Candidate {
    ENode node;
    Annotation narrow;
  };
  std::vector<Candidate> todo;
  for (const auto& [id, cls] : g.classes()) {
    for (const auto& n : cls.nodes) {
      if (n.kind != TermKind::Op || n.spec.op == Opcode::Zext || n.spec.op == Opcode::Sext) continue;
      uint32_t w = min_width(cls.interval, n.out.sign);
      if (w < n.out.width) todo.push_back({n, {w, n.out.sign}});
    }
  }
  size_t added = 0;
  for (const auto& c : todo) {
    Id original = g.add(c.node);
    ENode narrow = c.node;
    narrow.out = c.narrow;
    Id inner = g.add(narrow);
    ENode wrap;
    wrap.kind = TermKind::Op;
    wrap.spec = {c.narrow.is_signed() ? Opcode::Sext : Opcode::Zext, 0, 0};
    wrap.out = c.node.out;
    wrap.operand_anns = {c.narrow};
    wrap.children = {inner};
    Id outer = g.add(wrap);
    if (g.merge(original, outer, Justification::width_reduce())) ++added;
  }
  return added;
}

}  // namespace wlec
