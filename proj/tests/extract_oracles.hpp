#pragma once

// Extraction test oracles: exhaustive optimum, seeded random e-graphs and two
// hand-built instances where greedy extraction loses.

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include "wlec/extract.hpp"

namespace wlec::testing {

inline const Annotation kU4 = unsigned_of(4);

inline ENode var_node(const std::string& name) {
  ENode n;
  n.kind = TermKind::Var;
  n.name = name;
  n.out = kU4;
  return n;
}

inline ENode op_node(Opcode op, std::vector<Id> kids) {
  ENode n;
  n.kind = TermKind::Op;
  n.spec = {op, 0, 0};
  n.out = kU4;
  n.operand_anns.assign(kids.size(), kU4);
  n.children = std::move(kids);
  return n;
}

// Independent optimum: try every choice (or none) per reachable class and
// check the selection rules directly.
inline int64_t enumerate_optimum(const EGraph& g, const SharedSets& s) {
  std::vector<Id> cls;
  for (Id c : s.spec) cls.push_back(c);
  for (Id c : s.impl) {
    if (!s.spec.count(c)) cls.push_back(c);
  }
  std::map<Id, size_t> at;
  for (size_t i = 0; i < cls.size(); ++i) at[cls[i]] = i;
  std::vector<std::vector<std::vector<size_t>>> kids(cls.size());
  for (size_t i = 0; i < cls.size(); ++i) {
    for (const auto& n : g.eclass(cls[i]).nodes) {
      std::vector<size_t> k;
      for (Id c : n.children) k.push_back(at.at(g.find(c)));
      kids[i].push_back(k);
    }
  }
  size_t rs = at.at(g.spec_root()), ri = at.at(g.impl_root());
  std::vector<int> pick(cls.size(), -1);
  int64_t best = std::numeric_limits<int64_t>::min();
  std::function<void(size_t)> go = [&](size_t i) {
    if (i < cls.size()) {
      for (int k = -1; k < static_cast<int>(kids[i].size()); ++k) {
        pick[i] = k;
        go(i + 1);
      }
      return;
    }
    if (pick[rs] < 0 || pick[ri] < 0) return;
    std::vector<bool> parent(cls.size(), false);
    for (size_t c = 0; c < cls.size(); ++c) {
      if (pick[c] < 0) continue;
      for (size_t k : kids[c][pick[c]]) {
        if (pick[k] < 0) return;
        parent[k] = true;
      }
    }
    for (size_t c = 0; c < cls.size(); ++c) {
      if (pick[c] >= 0 && c != rs && c != ri && !parent[c]) return;
    }
    // Kahn's algorithm over the chosen edges.
    std::vector<int> indeg(cls.size(), 0);
    size_t chosen = 0;
    for (size_t c = 0; c < cls.size(); ++c) {
      if (pick[c] < 0) continue;
      ++chosen;
      for (size_t k : kids[c][pick[c]]) ++indeg[k];
    }
    std::vector<size_t> ready;
    for (size_t c = 0; c < cls.size(); ++c) {
      if (pick[c] >= 0 && indeg[c] == 0) ready.push_back(c);
    }
    size_t done = 0;
    while (!ready.empty()) {
      size_t c = ready.back();
      ready.pop_back();
      ++done;
      for (size_t k : kids[c][pick[c]]) {
        if (--indeg[k] == 0) ready.push_back(k);
      }
    }
    if (done != chosen) return;
    int64_t obj = 0;
    for (size_t c = 0; c < cls.size(); ++c) {
      if (pick[c] >= 0) obj += s.shared.count(cls[c]) ? static_cast<int64_t>(s.total) : -1;
    }
    best = std::max(best, obj);
  };
  go(0);
  return best;
}

inline std::optional<EGraph> random_graph(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](size_t n) { return static_cast<size_t>(std::uniform_int_distribution<size_t>(0, n - 1)(rng)); };
  EGraph g;
  std::vector<Id> ids = {g.add(var_node("a")), g.add(var_node("b"))};
  const Opcode binops[] = {Opcode::Add, Opcode::Mul, Opcode::Sub, Opcode::Xor, Opcode::And};
  size_t ops = 6 + pick(6);
  for (size_t i = 0; i < ops; ++i) {
    if (pick(4) == 0) {
      ids.push_back(g.add(op_node(Opcode::Not, {ids[pick(ids.size())]})));
    } else {
      ids.push_back(g.add(op_node(binops[pick(5)], {ids[pick(ids.size())], ids[pick(ids.size())]})));
    }
  }
  size_t merges = 2 + pick(4);
  for (size_t i = 0; i < merges; ++i) g.merge(ids[2 + pick(ids.size() - 2)], ids[pick(ids.size())], Justification::by_rule("r"));
  g.rebuild();
  g.set_roots(ids[ids.size() - 1], ids[ids.size() - 2 - pick(3)]);
  if (g.num_classes() > 12) return std::nullopt;
  for (const auto& [id, c] : g.classes()) {
    if (c.nodes.size() > 3) return std::nullopt;
  }
  return g;
}

// Root class: f(A, A) with A costing three nodes, or g(B, C) with two each.
// As trees 7 > 5, as shared graphs 4 < 5, so greedy picks the worse one.
inline EGraph diamond_graph() {
  EGraph g;
  Id a = g.add(var_node("a"));
  Id b = g.add(var_node("b"));
  Id na = g.add(op_node(Opcode::Not, {b}));
  Id x = g.add(op_node(Opcode::Xor, {na, b}));
  Id y = g.add(op_node(Opcode::Not, {x}));  // A = ~((~b) ^ b): three unshared nodes
  Id p = g.add(op_node(Opcode::Mul, {y, y}));
  Id q1 = g.add(op_node(Opcode::Not, {na}));
  Id nb = g.add(op_node(Opcode::Neg, {b}));
  Id q2 = g.add(op_node(Opcode::Neg, {nb}));
  Id q = g.add(op_node(Opcode::Add, {q1, q2}));
  g.merge(p, q, Justification::by_rule("r"));
  Id impl = g.add(op_node(Opcode::And, {a, b}));
  Id spec = g.add(op_node(Opcode::Or, {p, a}));
  g.rebuild();
  g.set_roots(spec, impl);
  return g;
}

// Both roots can reach a shared a*b+a; greedy's per-class cheapest choice avoids it.
inline EGraph sharing_graph() {
  EGraph g;
  Id a = g.add(var_node("a"));
  Id b = g.add(var_node("b"));
  Id m = g.add(op_node(Opcode::Mul, {a, b}));
  Id s1 = g.add(op_node(Opcode::Add, {m, a}));
  Id f = g.add(op_node(Opcode::Xor, {a, b}));
  Id gs = g.add(op_node(Opcode::Not, {s1}));
  Id h = g.add(op_node(Opcode::Or, {a, b}));
  Id k = g.add(op_node(Opcode::Neg, {s1}));
  g.merge(f, gs, Justification::by_rule("r"));
  g.merge(h, k, Justification::by_rule("r"));
  g.rebuild();
  g.set_roots(f, h);
  return g;
}

}  // namespace wlec::testing
