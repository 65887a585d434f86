#include "wlec/extract.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>

namespace wlec {

namespace {

// Reachable classes in a dense form, with each node reduced to its child list.
struct Problem {
  std::vector<Id> classes;
  std::map<Id, int> index;
  std::vector<std::vector<std::vector<int>>> options;  // class -> node -> child classes
  std::vector<int64_t> weight;
  std::vector<bool> shared;
  int root_spec = 0;
  int root_impl = 0;

  Problem(const EGraph& g, const SharedSets& s) {
    std::set<Id> all = s.spec;
    all.insert(s.impl.begin(), s.impl.end());
    for (Id c : all) {
      index[c] = static_cast<int>(classes.size());
      classes.push_back(c);
    }
    for (Id c : classes) {
      std::vector<std::vector<int>> opts;
      for (const ENode& n : g.eclass(c).nodes) {
        std::vector<int> kids;
        for (Id k : n.children) kids.push_back(index.at(g.find(k)));
        opts.push_back(std::move(kids));
      }
      options.push_back(std::move(opts));
      bool sh = s.shared.count(c) > 0;
      shared.push_back(sh);
      weight.push_back(sh ? static_cast<int64_t>(s.total) : -1);
    }
    root_spec = index.at(g.spec_root());
    root_impl = index.at(g.impl_root());
  }

  size_t size() const { return classes.size(); }
};

TermPtr build_term(const EGraph& g, const Selection& sel, Id cls, std::map<Id, TermPtr>& memo) {
  cls = g.find(cls);
  if (auto it = memo.find(cls); it != memo.end()) return it->second;
  const ENode& n = g.eclass(cls).nodes.at(sel.at(cls));
  std::vector<TermPtr> kids;
  for (Id k : n.children) kids.push_back(build_term(g, sel, k, memo));
  TermPtr t = node_to_term(n, std::move(kids));
  memo[cls] = t;
  return t;
}

ExtractionResult finish(const EGraph& g, const SharedSets& s, Selection sel, ExtractMethod method) {
  auto obj = selection_objective(g, s, sel);
  if (!obj) throw Error("extraction produced an invalid selection");
  ExtractionResult r;
  std::map<Id, TermPtr> memo;
  r.spec = build_term(g, sel, g.spec_root(), memo);
  r.impl = build_term(g, sel, g.impl_root(), memo);
  r.objective = *obj;
  r.node_count = sel.size();
  for (const auto& [c, i] : sel) r.shared_node_count += s.shared.count(c);
  r.selection = std::move(sel);
  r.method = method;
  return r;
}

// Greedy choice per class, ordered by (unshared node count, tree size).
std::vector<int> greedy_choice(const Problem& p) {
  constexpr uint64_t kCap = uint64_t{1} << 60;
  struct Best {
    int64_t cost = 0;
    uint64_t size = 0;
    int idx = -1;
  };
  std::vector<Best> best(p.size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t c = 0; c < p.size(); ++c) {
      for (size_t i = 0; i < p.options[c].size(); ++i) {
        int64_t cost = p.shared[c] ? 0 : 1;
        uint64_t size = 1;
        bool ready = true;
        for (int k : p.options[c][i]) {
          if (best[k].idx < 0) {
            ready = false;
            break;
          }
          cost += best[k].cost;
          size = std::min(kCap, size + best[k].size);
        }
        if (!ready) continue;
        Best& b = best[c];
        if (b.idx < 0 || cost < b.cost || (cost == b.cost && size < b.size)) {
          b = {cost, size, static_cast<int>(i)};
          changed = true;
        }
      }
    }
  }
  std::vector<int> out;
  for (const auto& b : best) out.push_back(b.idx);
  return out;
}

Selection selection_from(const Problem& p, const std::vector<int>& choice) {
  Selection sel;
  std::vector<int> stack = {p.root_spec, p.root_impl};
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    if (sel.count(p.classes[c])) continue;
    if (choice[c] < 0) throw Error("extraction found no finite term for a reachable class");
    sel[p.classes[c]] = static_cast<size_t>(choice[c]);
    for (int k : p.options[c][choice[c]]) stack.push_back(k);
  }
  return sel;
}

class BranchAndBound {
 public:
  BranchAndBound(const Problem& p, const IlpOptions& opt, std::vector<int> incumbent, int64_t incumbent_obj)
      : p_(p), opt_(opt), best_(std::move(incumbent)), best_obj_(incumbent_obj) {
    choice_.assign(p.size(), -1);
    selected_.assign(p.size(), false);
    greedy_ = best_;
  }

  void run() {
    start_ = std::chrono::steady_clock::now();
    select(p_.root_spec);
    select(p_.root_impl);
    dfs();
  }

  const std::vector<int>& best() const { return best_; }
  bool complete() const { return !stopped_; }
  uint64_t nodes() const { return nodes_; }

 private:
  const Problem& p_;
  IlpOptions opt_;
  std::vector<int> best_;
  int64_t best_obj_;
  std::vector<int> greedy_;
  std::vector<int> choice_;
  std::vector<bool> selected_;
  std::set<int> pending_;
  int64_t obj_ = 0;
  uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point start_;

  void select(int c) {
    if (selected_[c]) return;
    selected_[c] = true;
    obj_ += p_.weight[c];
    pending_.insert(c);
  }

  // True when `from` reaches `to` through chosen nodes.
  bool reaches(int from, int to) const {
    std::vector<int> stack = {from};
    std::vector<bool> seen(p_.size(), false);
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      if (c == to) return true;
      if (seen[c] || choice_[c] < 0) continue;
      seen[c] = true;
      for (int k : p_.options[c][choice_[c]]) stack.push_back(k);
    }
    return false;
  }

  // Every unselected shared class still reachable from the frontier counts fully.
  int64_t bound() const {
    int64_t ub = obj_;
    std::vector<bool> seen(p_.size(), false);
    std::vector<int> stack(pending_.begin(), pending_.end());
    for (int c : stack) seen[c] = true;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      for (const auto& opt : p_.options[c]) {
        for (int k : opt) {
          if (seen[k] || selected_[k]) continue;
          seen[k] = true;
          if (p_.shared[k]) ub += p_.weight[k];
          stack.push_back(k);
        }
      }
    }
    return ub;
  }

  bool out_of_budget() {
    if (nodes_ >= opt_.node_budget) return true;
    if ((nodes_ & 1023) == 0) {
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (secs > opt_.time_limit_s) return true;
    }
    return false;
  }

  void dfs() {
    if (stopped_) return;
    ++nodes_;
    if (out_of_budget()) {
      stopped_ = true;
      return;
    }
    if (pending_.empty()) {
      if (obj_ > best_obj_) {
        best_obj_ = obj_;
        best_ = choice_;
      }
      return;
    }
    if (bound() <= best_obj_) return;

    int c = *pending_.begin();
    pending_.erase(pending_.begin());
    std::vector<int> order;
    if (greedy_[c] >= 0) order.push_back(greedy_[c]);
    for (int i = 0; i < static_cast<int>(p_.options[c].size()); ++i) {
      if (i != greedy_[c]) order.push_back(i);
    }
    for (int i : order) {
      const auto& kids = p_.options[c][i];
      bool cyclic = false;
      for (int k : kids) cyclic = cyclic || k == c || (choice_[k] >= 0 && reaches(k, c));
      if (cyclic) continue;
      choice_[c] = i;
      std::vector<int> added;
      for (int k : kids) {
        if (!selected_[k]) {
          select(k);
          added.push_back(k);
        }
      }
      dfs();
      for (int k : added) {
        selected_[k] = false;
        obj_ -= p_.weight[k];
        pending_.erase(k);
      }
      choice_[c] = -1;
      if (stopped_) break;
    }
    pending_.insert(c);
  }
};

}  // namespace

std::set<Id> reachable(const EGraph& g, Id root) {
  std::set<Id> seen;
  std::vector<Id> stack = {g.find(root)};
  while (!stack.empty()) {
    Id c = stack.back();
    stack.pop_back();
    if (!seen.insert(c).second) continue;
    for (const ENode& n : g.eclass(c).nodes) {
      for (Id k : n.children) stack.push_back(g.find(k));
    }
  }
  return seen;
}

SharedSets shared_sets(const EGraph& g) {
  SharedSets s;
  s.spec = reachable(g, g.spec_root());
  s.impl = reachable(g, g.impl_root());
  std::set_intersection(s.spec.begin(), s.spec.end(), s.impl.begin(), s.impl.end(),
                        std::inserter(s.shared, s.shared.begin()));
  s.total = g.num_classes();
  return s;
}

std::string_view to_string(ExtractMethod m) { return m == ExtractMethod::Ilp ? "ilp" : "greedy"; }

nlohmann::json ExtractionResult::to_json() const {
  return {{"method", std::string(to_string(method))},
          {"objective", objective},
          {"shared_node_count", shared_node_count},
          {"node_count", node_count},
          {"optimal", optimal},
          {"search_nodes", search_nodes},
          {"spec", format_term(spec)},
          {"impl", format_term(impl)}};
}

std::optional<int64_t> selection_objective(const EGraph& g, const SharedSets& s, const Selection& sel) {
  auto in_cone = [&](Id c) { return s.spec.count(c) || s.impl.count(c); };
  Id rs = g.spec_root(), ri = g.impl_root();
  if (!sel.count(rs) || !sel.count(ri)) return std::nullopt;
  std::map<Id, std::vector<Id>> kids;
  std::set<Id> has_parent;
  for (const auto& [c, i] : sel) {
    if (g.find(c) != c || !in_cone(c) || i >= g.eclass(c).nodes.size()) return std::nullopt;
    for (Id k : g.eclass(c).nodes[i].children) {
      Id kc = g.find(k);
      if (!sel.count(kc)) return std::nullopt;
      kids[c].push_back(kc);
      has_parent.insert(kc);
    }
  }
  for (const auto& [c, i] : sel) {
    if (c != rs && c != ri && !has_parent.count(c)) return std::nullopt;
  }
  // Acyclic: depth-first search with colors.
  std::map<Id, int> color;
  std::function<bool(Id)> cyclic = [&](Id c) {
    int& col = color[c];
    if (col == 1) return true;
    if (col == 2) return false;
    col = 1;
    for (Id k : kids[c]) {
      if (cyclic(k)) return true;
    }
    color[c] = 2;
    return false;
  };
  for (const auto& [c, i] : sel) {
    if (cyclic(c)) return std::nullopt;
  }
  int64_t obj = 0;
  for (const auto& [c, i] : sel) obj += s.shared.count(c) ? static_cast<int64_t>(s.total) : -1;
  return obj;
}

ExtractionResult extract_greedy(const EGraph& g, const SharedSets& s) {
  Problem p(g, s);
  return finish(g, s, selection_from(p, greedy_choice(p)), ExtractMethod::Greedy);
}

ExtractionResult extract_ilp(const EGraph& g, const SharedSets& s, const IlpOptions& opt) {
  Problem p(g, s);
  std::vector<int> greedy = greedy_choice(p);
  Selection start = selection_from(p, greedy);
  // Keep only choices the greedy selection actually uses.
  std::vector<int> incumbent(p.size(), -1);
  for (const auto& [c, i] : start) incumbent[p.index.at(c)] = static_cast<int>(i);
  int64_t start_obj = *selection_objective(g, s, start);

  BranchAndBound bb(p, opt, incumbent, start_obj);
  bb.run();
  ExtractionResult r = finish(g, s, selection_from(p, bb.best()), ExtractMethod::Ilp);
  r.optimal = bb.complete();
  r.search_nodes = bb.nodes();
  return r;
}

std::string export_lp(const EGraph& g, const SharedSets& s) {
  Problem p(g, s);
  const int64_t big_m = static_cast<int64_t>(s.total);
  auto x = [](size_t c, size_t i) { return fmt::format("x_{}_{}", c, i); };
  auto t = [](size_t c) { return fmt::format("t_{}", c); };
  std::string out = "\\ maximally shared extraction\nMaximize\n obj:";
  for (size_t c = 0; c < p.size(); ++c) {
    for (size_t i = 0; i < p.options[c].size(); ++i) out += fmt::format(" {:+} {}", p.weight[c], x(c, i));
  }
  out += "\nSubject To\n";
  auto sum_class = [&](size_t c, const char* sign) {
    std::string s;
    for (size_t i = 0; i < p.options[c].size(); ++i) s += fmt::format(" {} {}", sign, x(c, i));
    return s;
  };
  for (int r : {p.root_spec, p.root_impl}) out += fmt::format(" root_{}:{} >= 1\n", r, sum_class(r, "+"));
  std::vector<std::vector<std::pair<size_t, size_t>>> parents(p.size());
  for (size_t c = 0; c < p.size(); ++c) {
    out += fmt::format(" one_{}:{} <= 1\n", c, sum_class(c, "+"));
    for (size_t i = 0; i < p.options[c].size(); ++i) {
      std::set<int> kids(p.options[c][i].begin(), p.options[c][i].end());
      for (int k : kids) {
        parents[k].push_back({c, i});
        out += fmt::format(" child_{}_{}_{}: + {}{} <= 0\n", c, i, k, x(c, i), sum_class(k, "-"));
        if (static_cast<size_t>(k) == c) {
          out += fmt::format(" acyc_{}_{}_{}: + {} {} <= {}\n", c, i, k, big_m, x(c, i), big_m - 1);
        } else {
          out += fmt::format(" acyc_{}_{}_{}: + {} - {} + {} {} <= {}\n", c, i, k, t(k), t(c), big_m, x(c, i),
                             big_m - 1);
        }
      }
    }
  }
  for (size_t c = 0; c < p.size(); ++c) {
    if (static_cast<int>(c) == p.root_spec || static_cast<int>(c) == p.root_impl) continue;
    out += fmt::format(" parent_{}:{}", c, sum_class(c, "+"));
    for (auto [pc, pi] : parents[c]) out += fmt::format(" - {}", x(pc, pi));
    out += " <= 0\n";
  }
  out += "Bounds\n";
  for (size_t c = 0; c < p.size(); ++c) out += fmt::format(" 0 <= {} <= {}\n", t(c), big_m - 1);
  out += "Binary\n";
  for (size_t c = 0; c < p.size(); ++c) {
    for (size_t i = 0; i < p.options[c].size(); ++i) out += " " + x(c, i) + "\n";
  }
  out += "General\n";
  for (size_t c = 0; c < p.size(); ++c) out += " " + t(c) + "\n";
  out += "End\n";
  return out;
}

}  // namespace wlec
