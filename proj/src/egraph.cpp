#include "wlec/egraph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "wlec/analysis.hpp"

namespace wlec {

namespace {

void hash_mix(size_t& h, size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }

bool same_range(const Range& a, const Range& b) { return a.lo == b.lo && a.hi == b.hi; }

std::string ann_text(Annotation a) { return fmt::format("{} {}", a.width, to_string(a.sign)); }

}  // namespace

size_t ENodeHash::operator()(const ENode& n) const {
  size_t h = static_cast<size_t>(n.kind);
  hash_mix(h, static_cast<size_t>(n.spec.op));
  hash_mix(h, n.spec.hi * 131 + n.spec.lo);
  hash_mix(h, n.out.width * 2 + static_cast<size_t>(n.out.sign));
  hash_mix(h, std::hash<std::string>()(n.name));
  hash_mix(h, std::hash<int64_t>()(n.value));
  for (const auto& a : n.operand_anns) hash_mix(h, a.width * 2 + static_cast<size_t>(a.sign));
  for (Id c : n.children) hash_mix(h, c);
  return h;
}

TermPtr node_to_term(const ENode& n, std::vector<TermPtr> children) {
  switch (n.kind) {
    case TermKind::Var:
      return make_var(n.name, n.out);
    case TermKind::Const:
      return make_const(n.value, n.out);
    case TermKind::Op:
      break;
  }
  std::vector<Operand> ops;
  for (size_t i = 0; i < children.size(); ++i) ops.push_back({n.operand_anns[i], std::move(children[i])});
  return make_op(n.spec, n.out, std::move(ops));
}

Id EGraph::find(Id id) const {
  while (uf_.at(id) != id) id = uf_[id];
  return id;
}

Id EGraph::find_mut(Id id) {
  Id root = find(id);
  while (uf_[id] != root) {
    Id next = uf_[id];
    uf_[id] = root;
    id = next;
  }
  return root;
}

ENode EGraph::canonicalize(ENode n) const {
  for (Id& c : n.children) c = find(c);
  return n;
}

std::optional<Id> EGraph::lookup(ENode n) const {
  auto it = memo_.find(canonicalize(std::move(n)));
  if (it == memo_.end()) return std::nullopt;
  return find(it->second);
}

size_t EGraph::num_nodes() const {
  size_t n = 0;
  for (const auto& [id, c] : classes_) n += c.nodes.size();
  return n;
}

Range EGraph::make_interval(const ENode& canonical) const {
  std::vector<Range> kids;
  kids.reserve(canonical.children.size());
  for (Id c : canonical.children) kids.push_back(classes_.at(find(c)).interval);
  return interval_make(canonical, kids);
}

Id EGraph::fresh_id(const ENode& original, const ENode&) {
  Id id = static_cast<Id>(nodes_.size());
  nodes_.push_back(original);
  uf_.push_back(id);
  forest_.emplace_back();
  exact_.emplace(original, id);
  return id;
}

Id EGraph::add(const ENode& n) {
  if (auto it = exact_.find(n); it != exact_.end()) return it->second;
  if (n.kind == TermKind::Op) {
    if (n.children.size() != arity(n.spec.op) || n.operand_anns.size() != n.children.size()) {
      throw IrError(fmt::format("malformed node for '{}'", to_string(n.spec.op)));
    }
  }
  for (Id c : n.children) {
    if (c >= nodes_.size()) throw Error(fmt::format("node child id {} does not exist", c));
  }
  ENode c = canonicalize(n);
  if (auto it = memo_.find(c); it != memo_.end()) {
    // Same canonical node under different child ids: alias it so explanations
    // can still name this exact node.
    Id existing = it->second;
    Id id = fresh_id(n, c);
    uf_[id] = find(existing);
    forest_[id] = ForestEdge{existing, Justification::congruence(), true};
    return id;
  }
  Id id = fresh_id(n, c);
  EClass cls;
  cls.id = id;
  cls.out = c.out;
  cls.interval = make_interval(c);
  cls.nodes.push_back(c);
  for (Id child : c.children) classes_.at(find(child)).parents.emplace_back(c, id);
  classes_.emplace(id, std::move(cls));
  memo_.emplace(std::move(c), id);
  return id;
}

Id EGraph::add_term(const TermPtr& t) {
  std::unordered_map<const Term*, Id> done;
  std::function<Id(const TermPtr&)> go = [&](const TermPtr& x) -> Id {
    if (auto it = done.find(x.get()); it != done.end()) return it->second;
    ENode n;
    n.kind = x->kind;
    n.out = x->out;
    n.name = x->name;
    n.value = x->value;
    n.spec = x->spec;
    for (const auto& o : x->operands) {
      n.operand_anns.push_back(o.ann);
      n.children.push_back(go(o.term));
    }
    Id id = add(n);
    done.emplace(x.get(), id);
    return id;
  };
  return go(t);
}

void EGraph::reroot(Id id) {
  std::vector<Id> path{id};
  while (forest_[path.back()]) path.push_back(forest_[path.back()]->next);
  for (size_t i = path.size() - 1; i >= 1; --i) {
    const ForestEdge& e = *forest_[path[i - 1]];
    forest_[path[i]] = ForestEdge{path[i - 1], e.just, !e.from_lhs};
  }
  forest_[id].reset();
}

bool EGraph::merge(Id lhs, Id rhs, const Justification& why) {
  Id a = find_mut(lhs);
  Id b = find_mut(rhs);
  if (a == b) return false;
  if (classes_.at(a).out != classes_.at(b).out) {
    throw Error(fmt::format("cannot merge classes with annotations {} and {} ({})", ann_text(classes_.at(a).out),
                            ann_text(classes_.at(b).out), why.rule.empty() ? "congruence" : why.rule));
  }
  reroot(lhs);
  forest_[lhs] = ForestEdge{rhs, why, true};
  ++unions_;

  if (classes_.at(a).parents.size() < classes_.at(b).parents.size()) std::swap(a, b);
  uf_[b] = a;
  EClass gone = std::move(classes_.at(b));
  classes_.erase(b);
  EClass& kept = classes_.at(a);
  Range merged = interval_merge(kept.interval, gone.interval);
  if (!same_range(merged, kept.interval)) {
    analysis_pending_.insert(analysis_pending_.end(), kept.parents.begin(), kept.parents.end());
  }
  if (!same_range(merged, gone.interval)) {
    analysis_pending_.insert(analysis_pending_.end(), gone.parents.begin(), gone.parents.end());
  }
  kept.interval = merged;
  pending_.insert(pending_.end(), gone.parents.begin(), gone.parents.end());
  kept.nodes.insert(kept.nodes.end(), gone.nodes.begin(), gone.nodes.end());
  kept.parents.insert(kept.parents.end(), gone.parents.begin(), gone.parents.end());
  return true;
}

void EGraph::rebuild() {
  while (!pending_.empty() || !analysis_pending_.empty()) {
    while (!pending_.empty()) {
      auto [node, id] = std::move(pending_.back());
      pending_.pop_back();
      ENode c = canonicalize(std::move(node));
      auto [it, inserted] = memo_.try_emplace(std::move(c), id);
      if (!inserted && find(it->second) != find(id)) merge(it->second, id, Justification::congruence());
    }
    while (!analysis_pending_.empty()) {
      auto [node, id] = std::move(analysis_pending_.back());
      analysis_pending_.pop_back();
      Id cls = find_mut(id);
      ENode c = canonicalize(std::move(node));
      Range r = make_interval(c);
      EClass& ec = classes_.at(cls);
      Range merged = interval_merge(ec.interval, r);
      if (!same_range(merged, ec.interval)) {
        ec.interval = merged;
        analysis_pending_.insert(analysis_pending_.end(), ec.parents.begin(), ec.parents.end());
      }
    }
  }
  for (auto& [id, cls] : classes_) {
    std::unordered_set<ENode, ENodeHash> seen;
    std::vector<ENode> nodes;
    for (auto& n : cls.nodes) {
      ENode c = canonicalize(std::move(n));
      if (seen.insert(c).second) nodes.push_back(std::move(c));
    }
    cls.nodes = std::move(nodes);
    cls.id = id;
    std::unordered_set<ENode, ENodeHash> pseen;
    std::vector<std::pair<ENode, Id>> parents;
    for (auto& [n, pid] : cls.parents) {
      ENode c = canonicalize(std::move(n));
      if (pseen.insert(c).second) parents.emplace_back(std::move(c), pid);
    }
    cls.parents = std::move(parents);
  }
}

TermPtr EGraph::id_term(Id id) const {
  if (term_cache_.size() < nodes_.size()) term_cache_.resize(nodes_.size());
  if (term_cache_[id]) return term_cache_[id];
  const ENode& n = nodes_.at(id);
  std::vector<TermPtr> kids;
  for (Id c : n.children) kids.push_back(id_term(c));
  term_cache_[id] = node_to_term(n, std::move(kids));
  return term_cache_[id];
}

std::vector<std::pair<Id, const EGraph::ForestEdge*>> EGraph::ancestors(Id id) const {
  std::vector<std::pair<Id, const ForestEdge*>> out;
  while (true) {
    const auto& e = forest_.at(id);
    out.emplace_back(id, e ? &*e : nullptr);
    if (!e) break;
    id = e->next;
  }
  return out;
}

void EGraph::explain_rel(Id a, Id b, std::vector<RelStep>& out) const {
  if (a == b) return;
  auto pa = ancestors(a);
  auto pb = ancestors(b);
  std::unordered_set<Id> in_b;
  for (const auto& [id, e] : pb) in_b.insert(id);
  size_t lca_a = 0;
  while (lca_a < pa.size() && !in_b.count(pa[lca_a].first)) ++lca_a;
  if (lca_a == pa.size()) throw Error("explain: ids are not in one proof tree");
  Id lca = pa[lca_a].first;

  auto step = [&](Id x, Id y, const Justification& j, bool forward) {
    if (j.kind != Justification::Kind::Congruence) {
      out.push_back({j, forward, {}, id_term(x), id_term(y)});
      return;
    }
    const ENode& nx = nodes_[x];
    const ENode& ny = nodes_[y];
    for (size_t i = 0; i < nx.children.size(); ++i) {
      std::vector<RelStep> sub;
      explain_rel(nx.children[i], ny.children[i], sub);
      for (auto& s : sub) {
        s.position.insert(s.position.begin(), static_cast<uint32_t>(i));
        out.push_back(std::move(s));
      }
    }
  };

  for (size_t i = 0; i < lca_a; ++i) step(pa[i].first, pa[i].second->next, pa[i].second->just, pa[i].second->from_lhs);
  std::vector<std::pair<Id, const ForestEdge*>> down;
  for (const auto& p : pb) {
    if (p.first == lca) break;
    down.push_back(p);
  }
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    step(it->second->next, it->first, it->second->just, !it->second->from_lhs);
  }
}

std::vector<ExplainStep> EGraph::explain(Id a, Id b) const {
  if (find(a) != find(b)) throw Error("explain: ids are in different classes");
  std::vector<RelStep> rel;
  explain_rel(a, b, rel);
  std::vector<ExplainStep> out;
  TermPtr cur = id_term(a);
  for (auto& r : rel) {
    if (!terms_equal(subterm_at(cur, r.position), r.before)) {
      throw Error(fmt::format("explain: step at {} does not apply", format_position(r.position)));
    }
    TermPtr next = replace_at(cur, r.position, r.after);
    out.push_back({r.just, r.forward, r.position, cur, next});
    cur = std::move(next);
  }
  if (!terms_equal(cur, id_term(b))) throw Error("explain: path does not end at the target term");
  return out;
}

nlohmann::json EGraph::to_json() const {
  auto reach = [&](Id root) {
    std::set<Id> seen{find(root)};
    std::deque<Id> q{find(root)};
    while (!q.empty()) {
      Id c = q.front();
      q.pop_front();
      for (const auto& n : classes_.at(c).nodes) {
        for (Id ch : n.children) {
          if (seen.insert(find(ch)).second) q.push_back(find(ch));
        }
      }
    }
    return seen;
  };
  auto in_spec = reach(spec_root_);
  auto in_impl = reach(impl_root_);
  nlohmann::json j;
  j["roots"] = {{"spec", spec_root()}, {"impl", impl_root()}};
  j["classes"] = nlohmann::json::array();
  for (const auto& [id, c] : classes_) {
    nlohmann::json cj;
    cj["id"] = id;
    cj["annotation"] = ann_text(c.out);
    cj["interval"] = {static_cast<int64_t>(c.interval.lo), static_cast<int64_t>(c.interval.hi)};
    bool s = in_spec.count(id);
    bool i = in_impl.count(id);
    cj["color"] = s && i ? "shared" : s ? "spec" : i ? "impl" : "unreachable";
    cj["nodes"] = nlohmann::json::array();
    for (const auto& n : c.nodes) {
      nlohmann::json nj;
      switch (n.kind) {
        case TermKind::Var:
          nj["var"] = n.name;
          break;
        case TermKind::Const:
          nj["const"] = n.value;
          break;
        case TermKind::Op:
          nj["op"] = std::string(to_string(n.spec.op));
          if (n.spec.op == Opcode::Slice) nj["slice"] = {n.spec.hi, n.spec.lo};
          break;
      }
      nj["children"] = nlohmann::json::array();
      for (size_t k = 0; k < n.children.size(); ++k) {
        nj["children"].push_back({{"class", find(n.children[k])}, {"annotation", ann_text(n.operand_anns[k])}});
      }
      cj["nodes"].push_back(nj);
    }
    j["classes"].push_back(cj);
  }
  return j;
}

EGraph init_pair(const Design& spec, const Design& impl) {
  auto sorted = [](std::vector<Port> p) {
    std::sort(p.begin(), p.end(), [](const Port& a, const Port& b) { return a.name < b.name; });
    return p;
  };
  if (sorted(spec.inputs) != sorted(impl.inputs)) {
    throw Error(fmt::format("port mismatch between '{}' and '{}'", spec.name, impl.name));
  }
  if (spec.output.ann != impl.output.ann) {
    throw Error(fmt::format("output annotation mismatch between '{}' and '{}'", spec.name, impl.name));
  }
  EGraph g;
  Id s = g.add_term(spec.body);
  Id i = g.add_term(impl.body);
  g.set_roots(s, i);
  g.rebuild();
  return g;
}

}  // namespace wlec
