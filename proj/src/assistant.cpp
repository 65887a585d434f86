#include "wlec/assistant.hpp"

#include <fmt/format.h>

#include <chrono>
#include <fstream>

namespace wlec {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  for (const auto& p : {spec_path, impl_path}) {
    if (p.empty()) throw Error("missing design path");
    if (!fs::exists(p)) throw Error("no such file: " + p);
  }
  if (rules != "none" && rules != "default" && rules != "catalogue" && !fs::exists(rules)) {
    throw Error("no such rule file: " + rules);
  }
  if (limits.max_iterations == 0 || limits.max_nodes == 0 || !(limits.time_limit_s > 0)) {
    throw Error("saturation limits must be positive");
  }
  if (oracle.samples == 0 || oracle.trivial_samples == 0) throw Error("sample counts must be positive");
}

std::vector<Rule> load_rules(const std::string& which) {
  if (which == "none") return {};
  if (which == "default") return default_rules();
  if (which == "catalogue") return catalogue();
  return parse_rules(read_file(which));
}

int verdict_exit_code(const WaterfallReport& r) {
  if (r.overall) return 0;
  for (const auto& o : r.obligations) {
    if (o.verdict.status == VerdictStatus::Fail && o.kind != "assume-guarantee") return 1;
  }
  return 2;
}

std::string describe_failure(const WaterfallReport& r) {
  for (const auto& o : r.obligations) {
    if (o.verdict.status != VerdictStatus::Fail || o.kind == "assume-guarantee") continue;
    std::string s = fmt::format("obligation {} ({} {}) fails", o.index, o.kind, o.rule.empty() ? o.chain : o.rule);
    if (!o.verdict.counterexample.empty()) {
      s += "\ncounterexample:";
      for (const auto& [name, value] : o.verdict.counterexample) s += fmt::format(" {}={}", name, value);
      s += fmt::format("\nleft={} right={}", o.verdict.left_value, o.verdict.right_value);
    }
    return s;
  }
  return {};
}

int RunResult::exit_code() const {
  int code = verdict_exit_code(report);
  return code == 0 && !adjacency_violations.empty() ? 2 : code;
}

nlohmann::json RunResult::to_json() const {
  nlohmann::json j;
  j["spec"] = spec.name;
  j["impl"] = impl.name;
  j["saturation"] = saturation.to_json();
  j["nodes"] = nodes;
  j["classes"] = classes;
  j["shared_classes"] = {{"initial", shared_initial}, {"final", shared_final}};
  j["extraction"] = extraction.to_json();
  j["adjacency_violations"] = adjacency_violations;
  j["checks"] = report.to_json();
  j["seconds"] = seconds;
  return j;
}

std::string RunResult::summary() const {
  std::string s;
  s += fmt::format("iterations:    {} ({})\n", saturation.iterations.size(), to_string(saturation.stop));
  s += fmt::format("e-graph:       {} nodes, {} classes\n", nodes, classes);
  s += fmt::format("shared:        {} -> {} classes\n", shared_initial, shared_final);
  s += fmt::format("roots merged:  {}\n", saturation.roots_merged ? "yes" : "no");
  s += fmt::format("steps:         {} spec, {} impl{}\n", waterfall.spec_steps.size(), waterfall.impl_steps.size(),
                   waterfall.has_center() ? ", center" : "");
  size_t pass = 0, fail = 0;
  for (const auto& o : report.obligations) {
    pass += o.verdict.status == VerdictStatus::Pass;
    fail += o.verdict.status == VerdictStatus::Fail;
  }
  s += fmt::format("obligations:   {} ({} pass, {} fail, {} unproven)\n", report.obligations.size(), pass, fail,
                   report.obligations.size() - pass - fail);
  if (!adjacency_violations.empty()) s += fmt::format("adjacency:     {} violations\n", adjacency_violations.size());
  static constexpr std::string_view verdicts[] = {"pass", "fail", "unproven"};
  s += fmt::format("verdict:       {}\n", verdicts[exit_code()]);
  s += fmt::format("time:          {:.3f} s\n", seconds);
  return s;
}

RunResult run_assistant(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  RunResult r;
  r.spec = load_design(cfg.spec_path);
  r.impl = load_design(cfg.impl_path);
  std::vector<Rule> rules = load_rules(cfg.rules);

  EGraph g = init_pair(r.spec, r.impl);
  r.shared_initial = shared_sets(g).shared.size();
  r.saturation = saturate(g, rules, cfg.limits);
  SharedSets sets = shared_sets(g);
  r.shared_final = sets.shared.size();
  r.nodes = g.num_nodes();
  r.classes = g.num_classes();

  r.extraction = cfg.method == ExtractMethod::Ilp ? extract_ilp(g, sets, cfg.ilp) : extract_greedy(g, sets);
  r.waterfall = build_waterfall(g, r.spec, r.impl, r.extraction, rules);
  if (cfg.width_normalize) r.waterfall = insert_width_normalization_steps(r.waterfall, rules);
  r.adjacency_violations = check_adjacency(r.waterfall, rules);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_waterfall(r.waterfall, cfg.out_dir);
    if (cfg.dump_graph) std::ofstream(cfg.out_dir / "graph.json") << g.to_json().dump(1) << "\n";
  }
  r.report = run_waterfall(r.waterfall, cfg.oracle);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!cfg.out_dir.empty()) {
    std::ofstream(cfg.out_dir / "report.json") << r.to_json().dump(2) << "\n";
    std::ofstream(cfg.out_dir / "summary.txt") << r.summary();
  }
  return r;
}

}  // namespace wlec
