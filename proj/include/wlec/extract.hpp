#pragma once

// Extraction of a maximally shared spec/impl pair from a two-rooted e-graph.
//
// A selection picks at most one node per class. It is valid when both roots
// are selected, every selected node's child classes are selected, every
// selected non-root class has a selected parent node, and the chosen nodes
// form no cycle. Its objective is K per selected shared class minus one per
// selected unshared class, where K is the total class count.

#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "wlec/egraph.hpp"

namespace wlec {

struct SharedSets {
  std::set<Id> spec;
  std::set<Id> impl;
  std::set<Id> shared;
  size_t total = 0;  // K: number of classes in the graph
};

/// Canonical classes reachable from `root` through any node, including `root`.
std::set<Id> reachable(const EGraph& g, Id root);
SharedSets shared_sets(const EGraph& g);

enum class ExtractMethod : uint8_t { Ilp, Greedy };
std::string_view to_string(ExtractMethod m);

/// Class id to index into `EClass::nodes`.
using Selection = std::map<Id, size_t>;

struct ExtractionResult {
  TermPtr spec;
  TermPtr impl;
  Selection selection;
  int64_t objective = 0;
  size_t shared_node_count = 0;
  size_t node_count = 0;
  ExtractMethod method = ExtractMethod::Ilp;
  /// False when the search stopped on its budget and returned the incumbent.
  bool optimal = true;
  uint64_t search_nodes = 0;

  nlohmann::json to_json() const;
};

struct IlpOptions {
  uint64_t node_budget = 2'000'000;
  double time_limit_s = 10.0;
};

/// Objective of a selection, or nullopt when it is not valid.
std::optional<int64_t> selection_objective(const EGraph& g, const SharedSets& s, const Selection& sel);

ExtractionResult extract_greedy(const EGraph& g, const SharedSets& s);
ExtractionResult extract_ilp(const EGraph& g, const SharedSets& s, const IlpOptions& opt = {});

/// The 0/1 program in CPLEX LP format, for external solvers.
std::string export_lp(const EGraph& g, const SharedSets& s);

}  // namespace wlec
