#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "wlec/assistant.hpp"

namespace fs = std::filesystem;
using namespace wlec;

namespace {

constexpr int kExitError = 3;

struct Options {
  RunConfig run;
  std::string method = "ilp";
  std::string dir;
  std::string fixtures = WLEC_FIXTURE_DIR;
  std::string lp;
  std::string convert_in;
  std::string convert_out;
  ValidationOptions validation;
};

void add_designs(CLI::App* app, Options& o) {
  app->add_option("--spec", o.run.spec_path, "specification design (.sv or .ir)")->required();
  app->add_option("--impl", o.run.impl_path, "implementation design (.sv or .ir)")->required();
}

void add_rules(CLI::App* app, Options& o) {
  app->add_option("--rules", o.run.rules, "none, default, catalogue, or a rule file")->capture_default_str();
}

void add_saturation(CLI::App* app, Options& o) {
  auto& l = o.run.limits;
  app->add_option("--max-iterations", l.max_iterations)->capture_default_str();
  app->add_option("--max-nodes", l.max_nodes)->capture_default_str();
  app->add_option("--time-limit", l.time_limit_s, "saturation time limit in seconds")->capture_default_str();
  app->add_flag("!--no-width-reduction", l.width_reduction, "disable the width-reduction pass");
  app->add_flag("!--keep-going", l.stop_when_merged, "continue saturating after the roots merge");
}

void add_extraction(CLI::App* app, Options& o) {
  app->add_option("--method", o.method, "extraction method")
      ->check(CLI::IsMember({"ilp", "greedy"}))
      ->capture_default_str();
  app->add_option("--ilp-node-budget", o.run.ilp.node_budget)->capture_default_str();
  app->add_option("--ilp-time-limit", o.run.ilp.time_limit_s)->capture_default_str();
}

void add_oracle(CLI::App* app, Options& o) {
  auto& c = o.run.oracle;
  app->add_option("--max-exhaustive-bits", c.max_exhaustive_bits)->capture_default_str();
  app->add_option("--samples", c.samples)->capture_default_str();
  app->add_option("--trivial-samples", c.trivial_samples)->capture_default_str();
  app->add_option("--seed", c.seed)->capture_default_str();
  app->add_option("--external-checker", c.external_cmd, "command with {left} and {right}; exit 0 pass, 1 fail");
  app->add_option("--threads", c.threads, "0 uses every core")->capture_default_str();
}

void add_config(CLI::App* app) { app->add_option("--config", "key=value file mirroring the flags"); }

// Splices `--config FILE` entries in front of the command-line flags so that
// later flags win. Returns the arguments in the reversed order CLI11 expects.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path);
    std::vector<std::string> extra;
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
      for (const auto& v : item.inputs) extra.push_back("--" + item.name + "=" + v);
    }
    auto at = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (at != args.end()) ++at;
    args.insert(at, extra.begin(), extra.end());
  }
  std::reverse(args.begin(), args.end());
  return args;
}

void finish(Options& o) { o.run.method = o.method == "greedy" ? ExtractMethod::Greedy : ExtractMethod::Ilp; }

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

struct Flow {
  Design spec, impl;
  std::vector<Rule> rules;
  EGraph g;
  SaturationReport sat;
};

Flow saturate_pair(const Options& o) {
  o.run.validate();
  Flow f{load_design(o.run.spec_path), load_design(o.run.impl_path), load_rules(o.run.rules), {}, {}};
  f.g = init_pair(f.spec, f.impl);
  f.sat = saturate(f.g, f.rules, o.run.limits);
  return f;
}

int cmd_check(const Options& o) {
  RunResult r = run_assistant(o.run);
  std::cout << r.summary();
  if (!r.adjacency_violations.empty()) {
    for (const auto& v : r.adjacency_violations) std::cout << "adjacency: " << v << "\n";
  }
  if (std::string f = describe_failure(r.report); !f.empty()) std::cout << f << "\n";
  if (!o.run.out_dir.empty()) std::cout << "artifacts:     " << o.run.out_dir.string() << "\n";
  return r.exit_code();
}

int cmd_saturate(const Options& o) {
  Flow f = saturate_pair(o);
  nlohmann::json j = f.sat.to_json();
  j["nodes"] = f.g.num_nodes();
  j["classes"] = f.g.num_classes();
  std::cout << j.dump(2) << "\n";
  if (!o.run.out_dir.empty()) {
    write_text(o.run.out_dir / "saturation.json", j.dump(2) + "\n");
    write_text(o.run.out_dir / "graph.json", f.g.to_json().dump(1) + "\n");
  }
  return f.sat.roots_merged ? 0 : 2;
}

int cmd_extract(const Options& o) {
  Flow f = saturate_pair(o);
  SharedSets sets = shared_sets(f.g);
  ExtractionResult x =
      o.run.method == ExtractMethod::Ilp ? extract_ilp(f.g, sets, o.run.ilp) : extract_greedy(f.g, sets);
  std::cout << x.to_json().dump(2) << "\n";
  if (!o.lp.empty()) write_text(o.lp, export_lp(f.g, sets));
  if (!o.run.out_dir.empty()) {
    Design s{f.spec.name + "_star", f.spec.inputs, f.spec.output, x.spec};
    Design i{f.impl.name + "_star", f.impl.inputs, f.impl.output, x.impl};
    write_text(o.run.out_dir / "spec_star.sv", emit_sv(s));
    write_text(o.run.out_dir / "impl_star.sv", emit_sv(i));
    write_text(o.run.out_dir / "spec_star.ir", emit_sexpr(s));
    write_text(o.run.out_dir / "impl_star.ir", emit_sexpr(i));
    write_text(o.run.out_dir / "extraction.json", x.to_json().dump(2) + "\n");
  }
  return 0;
}

int cmd_waterfall(const Options& o) {
  Flow f = saturate_pair(o);
  SharedSets sets = shared_sets(f.g);
  ExtractionResult x =
      o.run.method == ExtractMethod::Ilp ? extract_ilp(f.g, sets, o.run.ilp) : extract_greedy(f.g, sets);
  Waterfall w = build_waterfall(f.g, f.spec, f.impl, x, f.rules);
  if (o.run.width_normalize) w = insert_width_normalization_steps(w, f.rules);
  auto violations = check_adjacency(w, f.rules);
  for (const auto& v : violations) std::cout << "adjacency: " << v << "\n";
  nlohmann::json m = write_waterfall(w, o.run.out_dir);
  std::cout << fmt::format("{} obligations written to {}\n", m["obligations"].size(), o.run.out_dir.string());
  return violations.empty() ? 0 : 2;
}

int cmd_prove(const Options& o) {
  WaterfallReport r = run_waterfall_dir(o.dir, o.run.oracle);
  write_text(fs::path(o.dir) / "report.json", r.to_json().dump(2) + "\n");
  for (const auto& ob : r.obligations) {
    std::cout << fmt::format("{:>3} {:<16} {:<20} {:<9} {}\n", ob.index, ob.kind, ob.rule,
                             to_string(ob.verdict.status), to_string(ob.verdict.method));
  }
  std::cout << fmt::format("assume-guarantee: {}\n", r.assume_guarantee ? "pass" : "not pass");
  if (std::string f = describe_failure(r); !f.empty()) std::cout << f << "\n";
  return verdict_exit_code(r);
}

int cmd_validate(const Options& o) {
  std::vector<Rule> rules = o.run.rules == "default" ? catalogue() : load_rules(o.run.rules);
  size_t bad = 0;
  for (const Rule& r : rules) {
    auto t0 = std::chrono::steady_clock::now();
    auto v = validate_rule(r, o.validation);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bad += !v.empty();
    std::cout << fmt::format("{:<20} {:>4} violations  {:.2f} s\n", r.id, v.size(), s);
    for (const auto& x : v) {
      std::cout << fmt::format("  {}: {} vs {}", x.reason, x.lhs, x.rhs);
      for (const auto& [k, val] : x.params) std::cout << fmt::format(" {}={}", k, val);
      std::cout << "\n";
    }
  }
  return bad ? 1 : 0;
}

int cmd_convert(const Options& o) {
  Design d = load_design(o.convert_in);
  write_text(o.convert_out, o.convert_out.ends_with(".ir") ? emit_sexpr(d) : emit_sv(d));
  return 0;
}

int cmd_bench(const Options& o) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(o.fixtures)) {
    std::string f = e.path().filename().string();
    if (f.ends_with("_spec.sv") && fs::exists(fs::path(o.fixtures) / (f.substr(0, f.size() - 8) + "_impl.sv"))) {
      names.push_back(f.substr(0, f.size() - 8));
    }
  }
  std::sort(names.begin(), names.end());
  nlohmann::json all = nlohmann::json::array();
  std::cout << fmt::format("{:<14} {:>5} {:>7} {:>6} {:>13} {:>5} {:>9} {:>8}\n", "design", "iters", "nodes", "path",
                           "shared", "obls", "verdict", "seconds");
  int code = 0;
  for (const auto& n : names) {
    RunConfig cfg = o.run;
    cfg.spec_path = (fs::path(o.fixtures) / (n + "_spec.sv")).string();
    cfg.impl_path = (fs::path(o.fixtures) / (n + "_impl.sv")).string();
    if (!o.run.out_dir.empty()) cfg.out_dir = o.run.out_dir / n;
    RunResult r = run_assistant(cfg);
    static constexpr std::string_view verdicts[] = {"pass", "fail", "unproven"};
    std::cout << fmt::format("{:<14} {:>5} {:>7} {:>6} {:>6} -> {:<4} {:>5} {:>9} {:>8.3f}\n", n,
                             r.saturation.iterations.size(), r.nodes, r.saturation.roots_merged ? "Y" : "N",
                             r.shared_initial, r.shared_final, r.report.obligations.size(), verdicts[r.exit_code()],
                             r.seconds);
    nlohmann::json j = r.to_json();
    j["name"] = n;
    all.push_back(std::move(j));
    if (r.exit_code() == 1) code = 1;
  }
  if (!o.run.out_dir.empty()) write_text(o.run.out_dir / "bench.json", all.dump(2) + "\n");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-level equivalence checking by equality saturation", "wlec"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  auto* check = app.add_subcommand("check", "run the full flow and check every obligation");
  add_config(check);
  add_designs(check, o);
  add_rules(check, o);
  add_saturation(check, o);
  add_extraction(check, o);
  add_oracle(check, o);
  check->add_flag("--width-normalize", o.run.width_normalize, "insert width-relabel hops before width-sensitive steps");
  check->add_option("--out", o.run.out_dir, "artifact directory");
  check->add_flag("--dump-graph", o.run.dump_graph, "also write graph.json");

  auto* sat = app.add_subcommand("saturate", "saturate and report per-iteration statistics");
  add_config(sat);
  add_designs(sat, o);
  add_rules(sat, o);
  add_saturation(sat, o);
  sat->add_option("--out", o.run.out_dir, "directory for saturation.json and graph.json");

  auto* ext = app.add_subcommand("extract", "saturate, then extract the intermediate designs");
  add_config(ext);
  add_designs(ext, o);
  add_rules(ext, o);
  add_saturation(ext, o);
  add_extraction(ext, o);
  ext->add_option("--out", o.run.out_dir, "directory for the extracted designs");
  ext->add_option("--lp", o.lp, "write the extraction problem in LP format");

  auto* wf = app.add_subcommand("waterfall", "write the waterfall of intermediate designs without checking");
  add_config(wf);
  add_designs(wf, o);
  add_rules(wf, o);
  add_saturation(wf, o);
  add_extraction(wf, o);
  wf->add_flag("--width-normalize", o.run.width_normalize);
  wf->add_option("--out", o.run.out_dir, "waterfall directory")->required();

  auto* prove = app.add_subcommand("prove", "check the obligations of a waterfall directory");
  add_config(prove);
  prove->add_option("--dir", o.dir, "waterfall directory")->required()->check(CLI::ExistingDirectory);
  add_oracle(prove, o);

  auto* val = app.add_subcommand("validate-rules", "exhaustively audit rule conditions at small widths");
  add_config(val);
  val->add_option("--rules", o.run.rules, "catalogue (all rules) or a rule file")->capture_default_str();
  val->add_option("--max-width", o.validation.max_width)->capture_default_str();
  val->add_option("--max-shift-width", o.validation.max_shift_width)->capture_default_str();

  auto* bench = app.add_subcommand("bench", "run the full flow on every bundled fixture pair");
  add_config(bench);
  bench->add_option("--fixtures", o.fixtures, "directory of NAME_spec.sv / NAME_impl.sv pairs")
      ->check(CLI::ExistingDirectory)
      ->capture_default_str();
  add_rules(bench, o);
  add_saturation(bench, o);
  add_extraction(bench, o);
  add_oracle(bench, o);
  bench->add_flag("--width-normalize", o.run.width_normalize);
  bench->add_option("--out", o.run.out_dir, "artifact directory, one subdirectory per design");

  auto* conv = app.add_subcommand("convert", "translate a design between the SV subset and the IR");
  conv->add_option("--in", o.convert_in, "input design (.sv or .ir)")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", o.convert_out, "output design; the extension picks the format")->required();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    app.parse(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }
  finish(o);

  try {
    if (*check) return cmd_check(o);
    if (*sat) return cmd_saturate(o);
    if (*ext) return cmd_extract(o);
    if (*wf) return cmd_waterfall(o);
    if (*prove) return cmd_prove(o);
    if (*val) return cmd_validate(o);
    if (*bench) return cmd_bench(o);
    if (*conv) return cmd_convert(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
