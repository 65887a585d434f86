#pragma once

// E-graph over IR terms with explanation support. Every distinct node that is
// ever added gets its own id; ids are grouped into classes by a union-find, and
// a separate proof forest records why each union happened.

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wlec/frontend.hpp"
#include "wlec/ir.hpp"

namespace wlec {

using Id = uint32_t;

struct ENode {
  TermKind kind = TermKind::Var;
  OpSpec spec;
  Annotation out;
  std::string name;
  int64_t value = 0;
  std::vector<Annotation> operand_anns;
  std::vector<Id> children;

  friend bool operator==(const ENode&, const ENode&) = default;
};

struct ENodeHash {
  size_t operator()(const ENode& n) const;
};

struct Justification {
  enum class Kind : uint8_t { Rule, Congruence, WidthReduce };
  Kind kind = Kind::Congruence;
  std::string rule;
  std::map<std::string, int64_t> params;

  static Justification congruence() { return {}; }
  static Justification by_rule(std::string id, std::map<std::string, int64_t> params = {}) {
    return {Kind::Rule, std::move(id), std::move(params)};
  }
  static Justification width_reduce() { return {Kind::WidthReduce, "width-reduce", {}}; }
};

struct EClass {
  Id id = 0;
  Annotation out;
  std::vector<ENode> nodes;
  std::vector<std::pair<ENode, Id>> parents;
  Range interval{0, 0};
};

/// One rewrite in an explanation: `before` and `after` are whole terms that
/// differ only at `position`. `forward` is false when a rule was used right to left.
struct ExplainStep {
  Justification just;
  bool forward = true;
  Position position;
  TermPtr before;
  TermPtr after;
};

class EGraph {
 public:
  Id add(const ENode& n);
  Id add_term(const TermPtr& t);

  Id find(Id id) const;
  /// Unions the classes of `lhs` and `rhs`; returns false when already equal.
  bool merge(Id lhs, Id rhs, const Justification& why);
  /// Restores congruence and analysis fixpoint.
  void rebuild();

  std::optional<Id> lookup(ENode n) const;

  const std::map<Id, EClass>& classes() const { return classes_; }
  const EClass& eclass(Id id) const { return classes_.at(find(id)); }
  size_t num_classes() const { return classes_.size(); }
  size_t num_nodes() const;
  size_t num_ids() const { return nodes_.size(); }
  uint64_t num_unions() const { return unions_; }

  /// The node exactly as added under `id` and the term it denotes.
  const ENode& id_node(Id id) const { return nodes_.at(id); }
  TermPtr id_term(Id id) const;
  ENode canonicalize(ENode n) const;

  void set_roots(Id spec, Id impl) {
    spec_root_ = spec;
    impl_root_ = impl;
  }
  Id spec_root_id() const { return spec_root_; }
  Id impl_root_id() const { return impl_root_; }
  Id spec_root() const { return find(spec_root_); }
  Id impl_root() const { return find(impl_root_); }
  bool roots_merged() const { return spec_root() == impl_root(); }

  /// Rewrite steps turning id_term(a) into id_term(b). Requires find(a) == find(b).
  std::vector<ExplainStep> explain(Id a, Id b) const;

  nlohmann::json to_json() const;

 private:
  struct ForestEdge {
    Id next;
    Justification just;
    bool from_lhs;
  };
  struct RelStep {
    Justification just;
    bool forward;
    Position position;
    TermPtr before;
    TermPtr after;
  };

  std::vector<ENode> nodes_;
  std::vector<Id> uf_;
  std::vector<std::optional<ForestEdge>> forest_;
  std::unordered_map<ENode, Id, ENodeHash> memo_;
  std::unordered_map<ENode, Id, ENodeHash> exact_;
  std::map<Id, EClass> classes_;
  std::vector<std::pair<ENode, Id>> pending_;
  std::vector<std::pair<ENode, Id>> analysis_pending_;
  mutable std::vector<TermPtr> term_cache_;
  Id spec_root_ = 0;
  Id impl_root_ = 0;
  uint64_t unions_ = 0;

  Id find_mut(Id id);
  Id fresh_id(const ENode& original, const ENode& canonical);
  Range make_interval(const ENode& canonical) const;
  void reroot(Id id);
  void explain_rel(Id a, Id b, std::vector<RelStep>& out) const;
  std::vector<std::pair<Id, const ForestEdge*>> ancestors(Id id) const;
};

/// Builds the two-rooted graph from a spec/impl pair with identical ports.
EGraph init_pair(const Design& spec, const Design& impl);

TermPtr node_to_term(const ENode& n, std::vector<TermPtr> children);

}  // namespace wlec
