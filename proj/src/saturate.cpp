#include "wlec/saturate.hpp"

#include <chrono>

#include "wlec/analysis.hpp"

namespace wlec {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::RootsMerged:
      return "roots-merged";
    case StopReason::Saturated:
      return "saturated";
    case StopReason::IterationLimit:
      return "iteration-limit";
    case StopReason::NodeLimit:
      return "node-limit";
    case StopReason::TimeLimit:
      return "time-limit";
  }
  return "?";
}

nlohmann::json SaturationReport::to_json() const {
  nlohmann::json j;
  j["stop"] = std::string(to_string(stop));
  j["roots_merged"] = roots_merged;
  j["seconds"] = seconds;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : iterations) {
    j["iterations"].push_back({{"width_reduced", it.width_reduced},
                               {"matches", it.matches},
                               {"merged", it.merged},
                               {"already_equal", it.already_equal},
                               {"failed", it.failed},
                               {"classes", it.classes},
                               {"nodes", it.nodes},
                               {"seconds", it.seconds},
                               {"merges_by_rule", it.merges_by_rule}});
  }
  return j;
}

SaturationReport saturate(EGraph& g, const std::vector<Rule>& rules, const SaturationLimits& limits) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SaturationReport rep;
  g.rebuild();
  auto finish = [&](StopReason why) {
    rep.stop = why;
    rep.roots_merged = g.roots_merged();
    rep.seconds = elapsed();
    return rep;
  };
  if (limits.stop_when_merged && g.roots_merged()) return finish(StopReason::RootsMerged);

  for (size_t iter = 0; iter < limits.max_iterations; ++iter) {
    auto t0 = Clock::now();
    IterationStats st;
    if (limits.width_reduction) {
      st.width_reduced = width_reduction_pass(g);
      g.rebuild();
    }

    std::vector<Match> matches;
    for (size_t i = 0; i < rules.size(); ++i) {
      auto m = match_rule(g, rules[i], i);
      matches.insert(matches.end(), std::make_move_iterator(m.begin()), std::make_move_iterator(m.end()));
    }
    st.matches = matches.size();

    bool node_limit = false, time_limit = false;
    for (const auto& m : matches) {
      if (g.num_nodes() >= limits.max_nodes) {
        node_limit = true;
        break;
      }
      if (elapsed() > limits.time_limit_s) {
        time_limit = true;
        break;
      }
      switch (apply_match(g, rules[m.rule], m)) {
        case ApplyOutcome::Merged:
          ++st.merged;
          ++st.merges_by_rule[rules[m.rule].id];
          break;
        case ApplyOutcome::AlreadyEqual:
          ++st.already_equal;
          break;
        case ApplyOutcome::Failed:
          ++st.failed;
          break;
      }
    }
    g.rebuild();
    st.classes = g.num_classes();
    st.nodes = g.num_nodes();
    st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rep.iterations.push_back(std::move(st));

    const IterationStats& last = rep.iterations.back();
    if (limits.stop_when_merged && g.roots_merged()) return finish(StopReason::RootsMerged);
    if (node_limit || g.num_nodes() >= limits.max_nodes) return finish(StopReason::NodeLimit);
    if (time_limit || elapsed() > limits.time_limit_s) return finish(StopReason::TimeLimit);
    if (last.merged == 0 && last.width_reduced == 0) return finish(StopReason::Saturated);
  }
  return finish(StopReason::IterationLimit);
}

}  // namespace wlec
