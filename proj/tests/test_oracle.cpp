#include <doctest.h>

#include <filesystem>

#include "wlec/oracle.hpp"
#include "wlec/saturate.hpp"

using namespace wlec;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("wlec_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Brute force over every assignment, independent of the oracle's loop.
bool brute_equal(const Design& a, const Design& b) {
  std::vector<int64_t> v(a.inputs.size());
  std::function<bool(size_t)> go = [&](size_t i) {
    if (i == v.size()) {
      Environment env;
      for (size_t k = 0; k < v.size(); ++k) env.bind(a.inputs[k].name, a.inputs[k].ann, v[k]);
      return evaluate(a.body, env) == evaluate(b.body, env);
    }
    for (int64_t x = min_value(a.inputs[i].ann); x <= max_value(a.inputs[i].ann); ++x) {
      v[i] = x;
      if (!go(i + 1)) return false;
    }
    return true;
  };
  return go(0);
}

Design mutated_impl() {
  Design i = load_design(fixture("fig1_small_impl.sv"));
  std::string text = read_file(fixture("fig1_small_impl.sv"));
  auto pos = text.find("M + N");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 5, "M + N + 1");
  return parse_sv(text);
}

}  // namespace

TEST_CASE("scaled fig1 pair passes exhaustively") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design i = load_design(fixture("fig1_small_impl.sv"));
  CHECK(s.total_input_bits() == 12);
  Verdict v = check_equiv(s, i, OracleConfig{});
  CHECK(v.status == VerdictStatus::Pass);
  CHECK(v.method == CheckMethod::Exhaustive);
  CHECK(v.vectors == 4096);
  CHECK(brute_equal(s, i));
  CHECK(check_equiv(s, s, OracleConfig{}).status == VerdictStatus::Pass);
}

TEST_CASE("mutated impl fails with a real counterexample") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design m = mutated_impl();
  CHECK_FALSE(brute_equal(s, m));
  Verdict v = check_equiv(s, m, OracleConfig{});
  REQUIRE(v.status == VerdictStatus::Fail);
  Environment env;
  bool nonzero_ab = true;
  for (size_t k = 0; k < s.inputs.size(); ++k) {
    env.bind(s.inputs[k].name, s.inputs[k].ann, v.counterexample[k].second);
    if (s.inputs[k].name == "A" || s.inputs[k].name == "B") nonzero_ab = nonzero_ab && v.counterexample[k].second != 0;
  }
  CHECK(nonzero_ab);
  CHECK(evaluate(s.body, env) == v.left_value);
  CHECK(evaluate(m.body, env) == v.right_value);
  CHECK(v.left_value != v.right_value);
  Verdict again = check_equiv(s, m, OracleConfig{});
  CHECK(again.counterexample == v.counterexample);
}

TEST_CASE("changing any one constant is caught") {
  std::vector<Port> ports = {{"a", unsigned_of(5)}, {"b", signed_of(4)}};
  const char* base = "(+ 8 signed 6 signed (* 6 signed 5 unsigned a 3 unsigned (const 3 3 unsigned)) 4 signed "
                     "(- 4 signed 4 signed b 2 signed (const 1 2 signed)))";
  Design d{"d", ports, {"y", signed_of(8)}, parse_term(base, &ports)};
  for (auto [from, to] : {std::pair{"(const 3 3", "(const 2 3"}, std::pair{"(const 1 2", "(const 0 2"}}) {
    std::string text = base;
    text.replace(text.find(from), std::string(from).size(), to);
    Design e{"e", ports, {"y", signed_of(8)}, parse_term(text, &ports)};
    CHECK(check_equiv(d, e, OracleConfig{}).status == VerdictStatus::Fail);
  }
}

TEST_CASE("wide designs are only falsified by sampling") {
  std::vector<Port> ports = {{"a", unsigned_of(16)}, {"b", unsigned_of(16)}};
  Design d{"d", ports, {"y", unsigned_of(17)}, parse_term("(+ 17 unsigned 16 unsigned a 16 unsigned b)", &ports)};
  Design e{"e", ports, {"y", unsigned_of(17)}, parse_term("(+ 17 unsigned 16 unsigned b 16 unsigned a)", &ports)};
  OracleConfig cfg;
  cfg.samples = 2000;
  Verdict v = check_equiv(d, e, cfg);
  CHECK(v.status == VerdictStatus::Unproven);
  CHECK(v.method == CheckMethod::Random);
  CHECK(v.vectors == 2000);
  CHECK(check_equiv(d, e, cfg, CheckerHint::Trivial).vectors == cfg.trivial_samples);

  Design f{"f", ports, {"y", unsigned_of(17)}, parse_term("(- 17 unsigned 16 unsigned a 16 unsigned b)", &ports)};
  Verdict w = check_equiv(d, f, cfg);
  CHECK(w.status == VerdictStatus::Fail);
  CHECK(check_equiv(d, f, cfg).counterexample == w.counterexample);
}

TEST_CASE("external checker exit codes") {
  std::vector<Port> ports = {{"a", unsigned_of(32)}, {"b", unsigned_of(32)}};
  Design d{"d", ports, {"y", unsigned_of(32)}, parse_term("(& 32 unsigned 32 unsigned a 32 unsigned b)", &ports)};
  OracleConfig cfg;
  cfg.samples = 100;
  cfg.external_cmd = "test -s {left} && test -s {right}";
  CHECK(check_equiv(d, d, cfg).status == VerdictStatus::Pass);
  cfg.external_cmd = "exit 1";
  CHECK(check_equiv(d, d, cfg).status == VerdictStatus::Fail);
  cfg.external_cmd = "exit 7";
  Verdict v = check_equiv(d, d, cfg);
  CHECK(v.status == VerdictStatus::Unproven);
  CHECK_FALSE(v.diagnostic.empty());
}

TEST_CASE("port mismatch is an error") {
  std::vector<Port> p1 = {{"a", unsigned_of(4)}};
  std::vector<Port> p2 = {{"a", unsigned_of(5)}};
  Design d{"d", p1, {"y", unsigned_of(4)}, parse_term("a", &p1)};
  Design e{"e", p2, {"y", unsigned_of(5)}, parse_term("a", &p2)};
  CHECK_THROWS_AS(check_equiv(d, e, OracleConfig{}), Error);
}

TEST_CASE("waterfall on disk: pass, then a missing artifact") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design i = load_design(fixture("fig1_small_impl.sv"));
  EGraph g = init_pair(s, i);
  saturate(g, default_rules());
  auto x = extract_ilp(g, shared_sets(g));
  Waterfall w = build_waterfall(g, s, i, x, default_rules());
  fs::path dir = scratch("waterfall");
  nlohmann::json m = write_waterfall(w, dir);
  CHECK(m["obligations"].size() == w.obligations().size());

  auto rep = run_waterfall_dir(dir, OracleConfig{});
  CHECK(rep.overall);
  CHECK(rep.assume_guarantee);

  std::string victim = m["obligations"][0]["right"];
  fs::remove(dir / victim);
  auto broken = run_waterfall_dir(dir, OracleConfig{});
  CHECK_FALSE(broken.overall);
  CHECK_FALSE(broken.assume_guarantee);
  CHECK(broken.obligations[0].verdict.status == VerdictStatus::Unproven);
  CHECK_FALSE(broken.obligations[0].verdict.diagnostic.empty());
  fs::remove_all(dir);
}

TEST_CASE("a seeded mismatch fails only the center") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design m = mutated_impl();
  EGraph g = init_pair(s, m);
  saturate(g, default_rules());
  CHECK_FALSE(g.roots_merged());
  auto x = extract_ilp(g, shared_sets(g));
  Waterfall w = build_waterfall(g, s, m, x, default_rules());
  REQUIRE(w.has_center());
  auto rep = run_waterfall(w, OracleConfig{});
  for (const auto& o : rep.obligations) {
    if (o.kind == "center") {
      CHECK(o.verdict.status == VerdictStatus::Fail);
      CHECK_FALSE(o.verdict.counterexample.empty());
    } else if (o.kind == "step") {
      CHECK(o.verdict.status == VerdictStatus::Pass);
    }
  }
  CHECK_FALSE(rep.overall);
  CHECK_FALSE(rep.assume_guarantee);
}

TEST_CASE("reports are deterministic") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design m = mutated_impl();
  OracleConfig cfg;
  cfg.max_exhaustive_bits = 4;
  cfg.samples = 500;
  cfg.seed = 9;
  CHECK(check_equiv(s, m, cfg).to_json() == check_equiv(s, m, cfg).to_json());
}
