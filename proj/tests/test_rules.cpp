#include <doctest.h>

#include <chrono>

#include "egraph_helpers.hpp"
#include "wlec/analysis.hpp"
#include "wlec/egraph.hpp"
#include "wlec/rewrites.hpp"

using namespace wlec;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

const std::vector<Port> kAbc = {{"a", unsigned_of(4)}, {"b", unsigned_of(4)}, {"c", unsigned_of(2)}};

TermPtr T(const std::string& s, const std::vector<Port>& ports = kAbc) { return parse_term(s, &ports); }

const Rule& cat(const std::string& id) {
  const Rule* r = find_rule(catalogue(), id);
  REQUIRE_MESSAGE(r, id);
  return *r;
}

}  // namespace

TEST_CASE("rule syntax") {
  Rule r = parse_rule("r1 : (+ ?w ?s ?w ?s ?a ?w ?s ?b) => (+ ?w ?s ?w ?s ?b ?w ?s ?a) with trivial ;");
  CHECK(r.id == "r1");
  CHECK(r.hint == CheckerHint::Trivial);
  CHECK(r.saturate);
  CHECK_FALSE(r.cond);
  CHECK(format_pattern(r.lhs) == "(+ ?w ?s ?w ?s ?a ?w ?s ?b)");

  Rule c = parse_rule("r2 : (* ?wo ?so ?wa ?sa ?a 2 unsigned (const 2 2 unsigned)) => (+ ?wo ?so ?wa ?sa ?a ?wa ?sa ?a) "
                      "if ?wo >= ?wa + 1 with manual ;");
  CHECK_FALSE(c.saturate);
  REQUIRE(c.cond);

  auto two = parse_rules("# comment\na : (neg ?w ?s ?w ?s ?x) => (neg ?w ?s ?w ?s ?x) ;\n"
                         "b : (~ ?w ?s ?w ?s ?x) => (~ ?w ?s ?w ?s ?x) ;");
  CHECK(two.size() == 2);

  CHECK_THROWS_AS(parse_rule("x : ?a => ?a ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (neg ?w ?s ?w ?s ?a) => ?b ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (neg ?w ?s ?w ?s ?a) => (neg ?v ?s ?w ?s ?a) ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (neg [1] ?s ?w ?s ?a) => ?a ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (+ ?w ?s ?w ?s ?a) => ?a ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (neg ?w ?s ?w ?s ?a) => ?a with bogus ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rules("x : (neg ?w ?s ?w ?s ?a) => ?a ; x : (neg ?w ?s ?w ?s ?a) => ?a ;"), RuleSyntaxError);
  CHECK_THROWS_AS(parse_rule("x : (neg ?w ?s ?w ?s ?w) => ?w ;"), RuleSyntaxError);
}

TEST_CASE("expression functions") {
  auto eval = [](const std::string& cond) {
    Rule r = parse_rule("t : (neg 4 signed 4 signed ?a) => ?a if " + cond + " ;");
    std::map<std::string, int64_t> p;
    ExprContext ctx;
    ctx.params = &p;
    return static_cast<int64_t>(eval_expr(*r.cond, ctx));
  };
  CHECK(eval("2 ^ 10") == 1024);
  CHECK(eval("log2(64)") == 6);
  CHECK(eval("bits(0)") == 1);
  CHECK(eval("bits(8)") == 4);
  CHECK(eval("ispow2(12)") == 0);
  CHECK(eval("upat(-1, 4)") == 15);
  CHECK(eval("shamt(-1, 2, signed, 3)") == 7);
  CHECK(eval("coerce(-1, 2, signed, 3, unsigned)") == 7);
  CHECK(eval("ew(+, 8, unsigned, 8, unsigned)") == 9);
  CHECK(eval("es(-, 8, unsigned, 8, unsigned)") == 1);
  CHECK(eval("ew(*, 4, signed, 4, unsigned)") == 8);
  CHECK(eval("nt(+, 9, unsigned, 8, unsigned, 8, unsigned)") == 1);
  CHECK(eval("nt(+, 8, unsigned, 8, unsigned, 8, unsigned)") == 0);
  CHECK(eval("min(3, -2) + max(1, 5) * 2") == 8);
  CHECK(eval("!(1 < 2) || 3 != 3") == 0);
}

TEST_CASE("catalogue parses and every rule survives the exhaustive audit") {
  CHECK(catalogue().size() >= 20);
  CHECK(default_rules().size() < catalogue().size());
  for (const auto& r : catalogue()) {
    auto t0 = std::chrono::steady_clock::now();
    auto v = validate_rule(r);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE(r.id, ": ", secs, " s");
    INFO(r.id, v.empty() ? "" : " " + v[0].lhs + " vs " + v[0].rhs + " " + v[0].reason);
    CHECK(v.empty());
  }
}

TEST_CASE("the audit rejects unsound rules") {
  Rule shl_as_mul = parse_rule(
      "bad : (<< ?wo ?so ?wa ?sa ?a ?wb ?sb ?b) => (* ?wo ?so ?wa ?sa ?a ?wb ?sb ?b) ;");
  auto v = validate_rule(shl_as_mul);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].lhs_value != v[0].rhs_value);

  // Dropping the truncation guard on the inner shift is unsound.
  Rule unguarded = parse_rule(
      "mls : (* ?wo ?so ?w1 ?s1 ?a ?wx ?sx (<< ?wi ?si ?w2 ?s2 ?b ?wc ?sc ?c))"
      " => (<< ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)]"
      " (* [ew(*,?w1,?s1,?w2,?s2)] [es(*,?w1,?s1,?w2,?s2)] ?w1 ?s1 ?a ?w2 ?s2 ?b) ?wc ?sc ?c) ;");
  CHECK_FALSE(validate_rule(unguarded).empty());

  Rule widen = parse_rule("w : (neg ?w ?s ?w ?s ?a) => (neg [?w + 1] ?s ?w ?s ?a) ;");
  auto wv = validate_rule(widen);
  REQUIRE_FALSE(wv.empty());
  CHECK(wv[0].reason == "output annotations differ");
}

TEST_CASE("mult-left-shift truncation exclusion on a concrete term") {
  // b << c truncated to 4 bits: a * (b<<c) is not (a*b) << c.
  TermPtr t = T("(* 8 unsigned 4 unsigned a 4 unsigned (<< 4 unsigned 4 unsigned b 2 unsigned c))");
  CHECK_FALSE(match_term(cat("mult-left-shift"), t));
  TermPtr exact = T("(* 12 unsigned 4 unsigned a 7 unsigned (<< 7 unsigned 4 unsigned b 2 unsigned c))");
  auto rewritten = rewrite_root(cat("mult-left-shift"), exact);
  REQUIRE(rewritten);
  CHECK(format_term(*rewritten) ==
        format_term(T("(<< 12 unsigned 8 unsigned (* 8 unsigned 4 unsigned a 4 unsigned b) 2 unsigned c)")));
}

TEST_CASE("commutativity is its own inverse") {
  TermPtr t = T("(+ 6 signed 4 unsigned a 5 signed (* 5 signed 4 unsigned b 2 signed c))");
  auto once = rewrite_root(cat("comm-add"), t);
  REQUIRE(once);
  CHECK_FALSE(terms_equal(*once, t));
  auto twice = rewrite_root(cat("comm-add"), *once);
  REQUIRE(twice);
  CHECK(terms_equal(*twice, t));
}

TEST_CASE("fig1 impl has exactly one unmerge-shift match") {
  Design s = load_design(fixture("fig1_spec.sv"));
  Design i = load_design(fixture("fig1_impl.sv"));
  EGraph g = init_pair(s, i);
  auto m = match_rule(g, cat("unmerge-shift"));
  REQUIRE(m.size() == 1);
  CHECK(apply_match(g, cat("unmerge-shift"), m[0]) == ApplyOutcome::Merged);
  g.rebuild();
  CHECK(match_rule(g, cat("unmerge-shift")).size() == 1);
  CHECK(apply_match(g, cat("unmerge-shift"), m[0]) == ApplyOutcome::AlreadyEqual);
  CHECK(match_rule(g, cat("mult-to-add")).empty());
}

TEST_CASE("fig4 toy by rules") {
  std::vector<Port> px = {{"x", unsigned_of(8)}};
  EGraph g;
  Id root = g.add_term(T("(>> 8 unsigned 9 unsigned (* 9 unsigned 8 unsigned x 2 unsigned (const 2 2 unsigned)) "
                         "1 unsigned (const 1 1 unsigned))",
                         px));
  Id x = g.add_term(T("x", px));
  g.rebuild();
  CHECK(match_rule(g, cat("shift-cancel")).empty());
  auto m2s = match_rule(g, cat("mult-to-shift"));
  REQUIRE(m2s.size() == 1);
  CHECK(apply_match(g, cat("mult-to-shift"), m2s[0]) == ApplyOutcome::Merged);
  g.rebuild();
  auto sc = match_rule(g, cat("shift-cancel"));
  REQUIRE(sc.size() == 1);
  CHECK(apply_match(g, cat("shift-cancel"), sc[0]) == ApplyOutcome::Merged);
  g.rebuild();
  CHECK(g.find(root) == g.find(x));
  auto steps = g.explain(root, x);
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].just.rule == "mult-to-shift");
  CHECK(steps[1].just.rule == "shift-cancel");
  testing::check_graph_sound(g, px);
}

TEST_CASE("apply fails cleanly when a computed slot is out of range") {
  std::vector<Port> p = {{"a", unsigned_of(40)}, {"b", unsigned_of(40)}};
  EGraph g;
  g.add_term(T("(* 63 unsigned 40 unsigned a 40 unsigned b)", p));
  g.rebuild();
  Rule wide = parse_rule("w : (* ?wo ?so ?w1 ?s1 ?a ?w2 ?s2 ?b) => (zext ?wo ?so [ew(*,?w1,?s1,?w2,?s2)] unsigned "
                         "(* [ew(*,?w1,?s1,?w2,?s2)] unsigned ?w1 ?s1 ?a ?w2 ?s2 ?b)) ;");
  auto m = match_rule(g, wide);
  REQUIRE(m.size() == 1);
  size_t nodes = g.num_ids();
  CHECK(apply_match(g, wide, m[0]) == ApplyOutcome::Failed);
  CHECK(g.num_ids() == nodes);
}

TEST_CASE("rule application keeps random graphs sound") {
  std::vector<Port> ports = {{"a", unsigned_of(3)}, {"b", signed_of(3)}, {"c", unsigned_of(2)}};
  for (int seed = 0; seed < 8; ++seed) {
    EGraph g;
    g.add_term(T("(* 9 signed 4 unsigned (<< 4 unsigned 3 unsigned a 2 unsigned c) 3 signed b)", ports));
    g.add_term(T("(<< 7 unsigned 3 unsigned a 3 unsigned (+ 3 unsigned 2 unsigned c 2 unsigned c))", ports));
    g.add_term(T("(* 6 signed 3 signed b 3 unsigned (const 4 3 unsigned))", ports));
    g.rebuild();
    for (int round = 0; round < 2; ++round) {
      width_reduction_pass(g);
      g.rebuild();
      std::vector<std::pair<const Rule*, Match>> all;
      for (const auto& r : catalogue()) {
        for (auto& m : match_rule(g, r)) all.push_back({&r, m});
      }
      for (size_t k = static_cast<size_t>(seed); k < all.size(); k += 3) apply_match(g, *all[k].first, all[k].second);
      g.rebuild();
      testing::check_graph_sound(g, ports);
    }
  }
}
