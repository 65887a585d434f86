#include <doctest.h>

#include <set>

#include "wlec/oracle.hpp"
#include "wlec/proof.hpp"
#include "wlec/saturate.hpp"

using namespace wlec;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

struct Run {
  Design spec, impl;
  EGraph g;
  ExtractionResult x;
  Waterfall w;
};

Run run(const Design& spec, const Design& impl, const std::vector<Rule>& rules) {
  Run r{spec, impl, init_pair(spec, impl), {}, {}};
  saturate(r.g, rules);
  r.x = extract_ilp(r.g, shared_sets(r.g));
  r.w = build_waterfall(r.g, spec, impl, r.x, rules);
  return r;
}

Design fig4_spec() {
  std::vector<Port> px = {{"x", unsigned_of(8)}};
  return {"spec", px, {"y", unsigned_of(8)},
          parse_term("(>> 8 unsigned 9 unsigned (* 9 unsigned 8 unsigned x 2 unsigned (const 2 2 unsigned)) "
                     "1 unsigned (const 1 1 unsigned))",
                     &px)};
}

Design fig4_impl() {
  std::vector<Port> px = {{"x", unsigned_of(8)}};
  return {"impl", px, {"y", unsigned_of(8)}, parse_term("x", &px)};
}

OracleConfig exhaustive16() {
  OracleConfig c;
  c.max_exhaustive_bits = 16;
  return c;
}

}  // namespace

TEST_CASE("explaining a term against itself is empty") {
  Design s = fig4_spec();
  EGraph g = init_pair(s, fig4_impl());
  CHECK(explain_terms(g, s.body, s.body, default_rules()).empty());
}

TEST_CASE("fig4 toy explanation has two rule steps") {
  Run r = run(fig4_spec(), fig4_impl(), default_rules());
  REQUIRE(r.g.roots_merged());
  auto steps = explain_terms(r.g, r.spec.body, r.impl.body, default_rules());
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].rule == "mult-to-shift");
  CHECK(steps[0].position == Position{0});
  CHECK(steps[1].rule == "shift-cancel");
  CHECK(terms_equal(steps[0].before, r.spec.body));
  CHECK(terms_equal(steps[1].after, r.impl.body));
  for (const auto& s : steps) CHECK_FALSE(check_step(s, default_rules()));
}

TEST_CASE("fig1 waterfall is adjacent and every obligation passes at scaled widths") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design i = load_design(fixture("fig1_small_impl.sv"));
  Run r = run(s, i, default_rules());
  REQUIRE(r.g.roots_merged());
  CHECK_FALSE(r.w.has_center());
  CHECK(terms_equal(r.w.spec_star, r.w.impl_star));
  CHECK(check_adjacency(r.w, default_rules()).empty());

  std::set<std::string> used;
  for (const auto* steps : {&r.w.spec_steps, &r.w.impl_steps}) {
    for (const auto& st : *steps) used.insert(st.rule);
  }
  CHECK(used.count("unmerge-shift"));
  CHECK((used.count("mult-left-shift") || used.count("left-shift-mult")));

  auto rep = run_waterfall(r.w, exhaustive16());
  for (const auto& o : rep.obligations) {
    INFO(o.kind, " ", o.rule, " ", o.left, " vs ", o.right);
    CHECK(o.verdict.status == VerdictStatus::Pass);
  }
  CHECK(rep.overall);
  CHECK(rep.assume_guarantee);
}

TEST_CASE("width normalization splits width-sensitive steps") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design i = load_design(fixture("fig1_small_impl.sv"));
  Run r = run(s, i, default_rules());
  Waterfall n = insert_width_normalization_steps(r.w, default_rules());
  size_t relabels = 0;
  for (const auto* steps : {&n.spec_steps, &n.impl_steps}) {
    for (const auto& st : *steps) relabels += st.kind == StepKind::WidthRelabel;
  }
  CHECK(n.spec_steps.size() + n.impl_steps.size() == r.w.spec_steps.size() + r.w.impl_steps.size() + relabels);
  CHECK(check_adjacency(n, default_rules()).empty());
  auto rep = run_waterfall(n, exhaustive16());
  CHECK(rep.overall);

  // A chain without width-sensitive steps is left alone.
  Run t = run(fig4_spec(), fig4_impl(), default_rules());
  Waterfall tn = insert_width_normalization_steps(t.w, default_rules());
  CHECK(tn.spec_steps.size() == t.w.spec_steps.size());
  CHECK(tn.impl_steps.size() == t.w.impl_steps.size());
}

TEST_CASE("a mult-left-shift step with a loose inner width gains one hop") {
  std::vector<Port> ports = {{"a", unsigned_of(4)}, {"b", unsigned_of(4)}, {"c", unsigned_of(2)}};
  TermPtr before = parse_term("(* 14 unsigned 4 unsigned a 10 unsigned (<< 10 unsigned 4 unsigned b 2 unsigned c))", &ports);
  const Rule& r = *find_rule(catalogue(), "mult-left-shift");
  auto after = rewrite_root(r, before);
  REQUIRE(after);
  Waterfall w;
  w.spec = {"s", ports, {"y", unsigned_of(14)}, before};
  w.impl = {"i", ports, {"y", unsigned_of(14)}, *after};
  w.spec_star = w.impl_star = *after;
  w.spec_steps = {{StepKind::Rule, r.id, match_term(r, before)->params, true, {}, before, *after, r.hint}};
  CHECK(check_adjacency(w, catalogue()).empty());
  Waterfall n = insert_width_normalization_steps(w, catalogue());
  REQUIRE(n.spec_steps.size() == 2);
  CHECK(n.spec_steps[0].kind == StepKind::WidthRelabel);
  CHECK(subterm_at(n.spec_steps[0].after, {1})->out == unsigned_of(7));
  CHECK(check_adjacency(n, catalogue()).empty());
  CHECK(run_waterfall(n, OracleConfig{}).overall);
}

TEST_CASE("adjacency checker rejects tampered steps") {
  Run r = run(fig4_spec(), fig4_impl(), default_rules());
  REQUIRE(r.w.spec_steps.size() + r.w.impl_steps.size() == 2);
  Waterfall w = r.w;
  auto& steps = w.spec_steps.empty() ? w.impl_steps : w.spec_steps;
  RewriteStep bad = steps[0];
  bad.rule = "comm-add";
  CHECK(check_step(bad, default_rules()));
  RewriteStep moved = steps[0];
  moved.position = {1};
  CHECK(check_step(moved, default_rules()));
  steps[0].params["wo"] += 1;
  CHECK_FALSE(check_adjacency(w, default_rules()).empty());
}

TEST_CASE("identical designs give an empty waterfall") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Run r = run(s, s, default_rules());
  CHECK(r.w.spec_steps.empty());
  CHECK(r.w.impl_steps.empty());
  auto ob = r.w.obligations();
  REQUIRE(ob.size() == 1);
  CHECK(ob[0].kind == Obligation::Kind::AssumeGuarantee);
  auto rep = run_waterfall(r.w, OracleConfig{});
  CHECK(rep.assume_guarantee);
}

TEST_CASE("without rules the waterfall keeps a center obligation") {
  Design s = load_design(fixture("fig1_small_spec.sv"));
  Design i = load_design(fixture("fig1_small_impl.sv"));
  Run r = run(s, i, {});
  CHECK_FALSE(r.g.roots_merged());
  CHECK(r.w.has_center());
  auto ob = r.w.obligations();
  bool center = false;
  for (const auto& o : ob) center = center || o.kind == Obligation::Kind::Center;
  CHECK(center);
  CHECK(check_adjacency(r.w, {}).empty());
}
