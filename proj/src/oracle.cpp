#include "wlec/oracle.hpp"

#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <thread>

namespace wlec {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::string substitute(std::string cmd, const std::string& key, const std::string& value) {
  for (size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
    cmd.replace(pos, key.size(), value);
  }
  return cmd;
}

Verdict with_external(const Design& left, const Design& right, const std::string& cmd) {
  static std::atomic<uint64_t> counter{0};
  fs::path dir = fs::temp_directory_path() / fmt::format("wlec-{}-{}", ::getpid(), counter++);
  fs::create_directories(dir);
  std::ofstream(dir / "left.sv") << emit_sv(left);
  std::ofstream(dir / "right.sv") << emit_sv(right);
  Verdict v = run_external(cmd, dir / "left.sv", dir / "right.sv");
  std::error_code ec;
  fs::remove_all(dir, ec);
  return v;
}

struct Job {
  size_t index = 0;
  std::string kind, chain, rule, hint, left, right;
  CheckerHint checker = CheckerHint::Simulation;
  std::function<std::pair<Design, Design>()> load;  // throws when an artifact is missing
  std::vector<size_t> premises;
};

WaterfallReport run_jobs(std::vector<Job> jobs, const OracleConfig& cfg) {
  auto t0 = Clock::now();
  WaterfallReport rep;
  rep.obligations.resize(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      ObligationResult& r = rep.obligations[i];
      r = {j.index, j.kind, j.chain, j.rule, j.hint, j.left, j.right, {}};
      if (j.kind == "assume-guarantee") continue;
      try {
        auto [l, rt] = j.load();
        r.verdict = check_equiv(l, rt, cfg, j.checker);
      } catch (const std::exception& e) {
        r.verdict.status = VerdictStatus::Unproven;
        r.verdict.diagnostic = e.what();
      }
    }
  };
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool all = true;
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].kind != "assume-guarantee") continue;
    bool failed = false, unproven = false;
    for (size_t p : jobs[i].premises) {
      if (p >= rep.obligations.size()) {
        unproven = true;
        continue;
      }
      VerdictStatus s = rep.obligations[p].verdict.status;
      failed = failed || s == VerdictStatus::Fail;
      unproven = unproven || s == VerdictStatus::Unproven;
    }
    Verdict& v = rep.obligations[i].verdict;
    v.method = CheckMethod::Derived;
    v.status = failed ? VerdictStatus::Fail : unproven ? VerdictStatus::Unproven : VerdictStatus::Pass;
    if (v.status != VerdictStatus::Pass) v.diagnostic = "a premise did not pass";
    rep.assume_guarantee = v.status == VerdictStatus::Pass;
  }
  for (const auto& o : rep.obligations) all = all && o.verdict.status == VerdictStatus::Pass;
  rep.overall = all && !jobs.empty();
  rep.seconds = since(t0);
  return rep;
}

}  // namespace

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass:
      return "pass";
    case VerdictStatus::Fail:
      return "fail";
    case VerdictStatus::Unproven:
      return "unproven";
  }
  return "?";
}

std::string_view to_string(CheckMethod m) {
  switch (m) {
    case CheckMethod::Exhaustive:
      return "exhaustive";
    case CheckMethod::Random:
      return "random";
    case CheckMethod::External:
      return "external";
    case CheckMethod::Derived:
      return "derived";
    case CheckMethod::None:
      return "none";
  }
  return "?";
}

nlohmann::json Verdict::to_json() const {
  nlohmann::json j = {{"status", std::string(to_string(status))},
                      {"method", std::string(to_string(method))},
                      {"vectors", vectors}};
  if (status == VerdictStatus::Fail && !counterexample.empty()) {
    nlohmann::json cex = nlohmann::json::object();
    for (const auto& [k, v] : counterexample) cex[k] = v;
    j["counterexample"] = cex;
    j["left_value"] = left_value;
    j["right_value"] = right_value;
  }
  if (!diagnostic.empty()) j["diagnostic"] = diagnostic;
  return j;
}

nlohmann::json WaterfallReport::to_json() const {
  nlohmann::json j;
  j["overall"] = overall ? "pass" : "not-pass";
  j["assume_guarantee"] = assume_guarantee ? "pass" : "not-pass";
  j["obligations"] = nlohmann::json::array();
  for (const auto& o : obligations) {
    nlohmann::json e = {{"index", o.index}, {"kind", o.kind},   {"chain", o.chain},           {"rule", o.rule},
                        {"checker_hint", o.hint}, {"left", o.left}, {"right", o.right}, {"verdict", o.verdict.to_json()}};
    j["obligations"].push_back(std::move(e));
  }
  return j;
}

Verdict run_external(const std::string& cmd, const fs::path& left, const fs::path& right) {
  auto t0 = Clock::now();
  Verdict v;
  v.method = CheckMethod::External;
  std::string line = substitute(substitute(cmd, "{left}", shell_quote(left.string())), "{right}",
                                shell_quote(right.string()));
  int rc = std::system(line.c_str());
  if (rc == -1 || !WIFEXITED(rc)) {
    v.status = VerdictStatus::Unproven;
    v.diagnostic = "external checker did not run to completion";
  } else {
    int code = WEXITSTATUS(rc);
    v.status = code == 0 ? VerdictStatus::Pass : code == 1 ? VerdictStatus::Fail : VerdictStatus::Unproven;
    if (code > 1) v.diagnostic = fmt::format("external checker exited with {}", code);
  }
  v.seconds = since(t0);
  return v;
}

Verdict check_equiv(const Design& left, const Design& right, const OracleConfig& cfg, CheckerHint hint) {
  auto t0 = Clock::now();
  if (left.inputs != right.inputs) throw Error("designs have different input ports");
  if (left.output.ann != right.output.ann) throw Error("designs have different output annotations");

  std::vector<std::string> names = left.input_names();
  CompiledTerm a(left.body, names), b(right.body, names);
  const auto& ports = left.inputs;
  std::vector<int64_t> in(ports.size());
  Verdict v;

  auto differs = [&] {
    ++v.vectors;
    int64_t x = a.eval(in), y = b.eval(in);
    if (x == y) return false;
    v.status = VerdictStatus::Fail;
    for (size_t i = 0; i < ports.size(); ++i) v.counterexample.push_back({ports[i].name, in[i]});
    v.left_value = x;
    v.right_value = y;
    return true;
  };

  if (left.total_input_bits() <= cfg.max_exhaustive_bits) {
    v.method = CheckMethod::Exhaustive;
    for (size_t i = 0; i < ports.size(); ++i) in[i] = min_value(ports[i].ann);
    // Lexicographic order: the last input varies fastest.
    bool done = false;
    while (!done && !differs()) {
      size_t i = ports.size();
      while (true) {
        if (i == 0) {
          done = true;
          break;
        }
        --i;
        if (in[i] < max_value(ports[i].ann)) {
          ++in[i];
          break;
        }
        in[i] = min_value(ports[i].ann);
      }
    }
    if (done) v.status = VerdictStatus::Pass;
  } else {
    v.method = CheckMethod::Random;
    std::mt19937_64 rng(cfg.seed);
    uint64_t n = hint == CheckerHint::Trivial ? cfg.trivial_samples : cfg.samples;
    bool failed = false;
    for (uint64_t k = 0; k < n && !failed; ++k) {
      for (size_t i = 0; i < ports.size(); ++i) {
        in[i] = std::uniform_int_distribution<int64_t>(min_value(ports[i].ann), max_value(ports[i].ann))(rng);
      }
      failed = differs();
    }
    if (!failed) {
      v.status = VerdictStatus::Unproven;
      if (!cfg.external_cmd.empty()) {
        uint64_t sampled = v.vectors;
        v = with_external(left, right, cfg.external_cmd);
        v.vectors = sampled;
      }
    }
  }
  v.seconds = since(t0);
  return v;
}

WaterfallReport run_waterfall(const Waterfall& w, const OracleConfig& cfg) {
  std::vector<Job> jobs;
  auto obligations = w.obligations();
  for (size_t i = 0; i < obligations.size(); ++i) {
    const Obligation& o = obligations[i];
    Job j;
    j.index = i;
    j.kind = std::string(to_string(o.kind));
    j.chain = o.chain;
    j.rule = o.rule;
    j.hint = std::string(to_string(o.hint));
    j.checker = o.hint;
    j.left = format_term(o.left);
    j.right = format_term(o.right);
    j.premises = o.premises;
    Design l{"left", w.spec.inputs, w.spec.output, o.left};
    Design r{"right", w.spec.inputs, w.spec.output, o.right};
    j.load = [l, r] { return std::make_pair(l, r); };
    jobs.push_back(std::move(j));
  }
  return run_jobs(std::move(jobs), cfg);
}

WaterfallReport run_waterfall_dir(const fs::path& dir, const OracleConfig& cfg) {
  nlohmann::json m = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
  std::vector<Job> jobs;
  for (const auto& o : m.at("obligations")) {
    Job j;
    j.index = o.at("index").get<size_t>();
    j.kind = o.at("kind").get<std::string>();
    j.chain = o.at("chain").get<std::string>();
    j.rule = o.at("rule").get<std::string>();
    j.hint = o.at("checker_hint").get<std::string>();
    j.checker = j.hint == "trivial" ? CheckerHint::Trivial
                : j.hint == "external-strong" ? CheckerHint::ExternalStrong
                                              : CheckerHint::Simulation;
    j.left = o.at("left").get<std::string>();
    j.right = o.at("right").get<std::string>();
    if (o.contains("premises")) j.premises = o.at("premises").get<std::vector<size_t>>();
    fs::path lp = dir / j.left, rp = dir / j.right;
    j.load = [lp, rp] {
      for (const auto& p : {lp, rp}) {
        if (!fs::exists(p)) throw Error("missing artifact " + p.string());
      }
      return std::make_pair(load_design(lp.string()), load_design(rp.string()));
    };
    jobs.push_back(std::move(j));
  }
  return run_jobs(std::move(jobs), cfg);
}

}  // namespace wlec
