#include <doctest.h>

#include <random>

#include "egraph_helpers.hpp"
#include "random_terms.hpp"
#include "wlec/analysis.hpp"
#include "wlec/egraph.hpp"

using namespace wlec;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

ENode op_node(Opcode op, Annotation out, std::vector<Annotation> anns) {
  ENode n;
  n.kind = TermKind::Op;
  n.spec = {op, 0, 0};
  n.out = out;
  n.operand_anns = std::move(anns);
  n.children.assign(n.operand_anns.size(), 0);
  return n;
}

bool same(const Range& r, Wide lo, Wide hi) { return r.lo == lo && r.hi == hi; }

}  // namespace

TEST_CASE("interval_make examples") {
  ENode v;
  v.kind = TermKind::Var;
  v.name = "a";
  v.out = unsigned_of(8);
  CHECK(same(interval_make(v, {}), 0, 255));

  std::vector<Range> two = {{0, 255}, {0, 255}};
  CHECK(same(interval_make(op_node(Opcode::Add, unsigned_of(9), {unsigned_of(8), unsigned_of(8)}), two), 0, 510));
  CHECK(same(interval_make(op_node(Opcode::Add, unsigned_of(8), {unsigned_of(8), unsigned_of(8)}), two), 0, 255));

  std::vector<Range> narrow = {{0, 100}, {0, 100}};
  CHECK(same(interval_make(op_node(Opcode::Add, unsigned_of(8), {unsigned_of(8), unsigned_of(8)}), narrow), 0, 200));

  ENode c;
  c.kind = TermKind::Const;
  c.value = -3;
  c.out = signed_of(4);
  CHECK(same(interval_make(c, {}), -3, -3));
}

TEST_CASE("interval_merge examples") {
  CHECK(same(interval_merge({0, 510}, {0, 255}), 0, 255));
  CHECK(same(interval_merge({3, 10}, {3, 10}), 3, 10));
  CHECK(same(interval_merge({3, 10}, {5, 20}), 5, 10));
  CHECK_THROWS_AS(interval_merge({0, 3}, {4, 9}), Error);
}

TEST_CASE("interval_make is sound on random sub-ranges") {
  std::mt19937_64 rng(17);
  auto pick = [&](int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); };
  auto ann = [&](uint32_t maxw) {
    return Annotation{static_cast<uint32_t>(pick(1, maxw)), pick(0, 1) ? Signage::Signed : Signage::Unsigned};
  };
  for (int iter = 0; iter < 3000; ++iter) {
    Opcode op = kAllOpcodes[pick(0, std::size(kAllOpcodes) - 1)];
    size_t n = arity(op);
    ENode node;
    node.kind = TermKind::Op;
    node.spec = {op, 0, 0};
    node.out = ann(6);
    std::vector<Annotation> child_out;
    std::vector<Range> child_range;
    for (size_t i = 0; i < n; ++i) {
      Annotation a = ann(5);
      if (is_shift(op) && i == 1) a = {static_cast<uint32_t>(pick(1, 3)), a.sign};
      node.operand_anns.push_back(a);
      Annotation co = pick(0, 1) ? a : ann(5);
      child_out.push_back(co);
      int64_t x = pick(min_value(co), max_value(co));
      int64_t y = pick(min_value(co), max_value(co));
      child_range.push_back({std::min(x, y), std::max(x, y)});
      node.children.push_back(0);
    }
    if (op == Opcode::Slice) {
      node.spec.lo = static_cast<uint32_t>(pick(0, 6));
      node.spec.hi = node.spec.lo + static_cast<uint32_t>(pick(0, 3));
    }
    Range r = interval_make(node, child_range);
    std::vector<int64_t> vals(n);
    std::function<void(size_t)> go = [&](size_t i) {
      if (i == n) {
        std::vector<int64_t> args;
        for (size_t k = 0; k < n; ++k) args.push_back(coerce(vals[k], child_out[k], node.operand_anns[k]));
        int64_t v = apply_op(node.spec, node.out, node.operand_anns, args);
        INFO(to_string(op), " out ", node.out.width, " ", format_range(r));
        REQUIRE(v >= r.lo);
        REQUIRE(v <= r.hi);
        return;
      }
      for (int64_t v = static_cast<int64_t>(child_range[i].lo); v <= child_range[i].hi; ++v) {
        vals[i] = v;
        go(i + 1);
      }
    };
    go(0);
  }
}

TEST_CASE("width reduction on a narrow sum") {
  std::vector<Port> ports = {{"a", unsigned_of(7)}, {"b", unsigned_of(7)}};
  EGraph g;
  Id sum = g.add_term(parse_term("(+ 9 unsigned 8 unsigned a 8 unsigned b)", &ports));
  g.rebuild();
  CHECK(same(g.eclass(sum).interval, 0, 254));
  CHECK(width_reduction_pass(g) == 1);
  g.rebuild();
  const EClass& c = g.eclass(sum);
  REQUIRE(c.nodes.size() == 2);
  const ENode& wrap = c.nodes[1];
  CHECK(wrap.spec.op == Opcode::Zext);
  CHECK(wrap.operand_anns[0] == unsigned_of(8));
  CHECK(g.eclass(wrap.children[0]).nodes[0].out == unsigned_of(8));
  CHECK(width_reduction_pass(g) == 0);
  testing::check_graph_sound(g, ports);

  auto steps = g.explain(sum, g.add(wrap));
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].just.kind == Justification::Kind::WidthReduce);
}

TEST_CASE("width reduction leaves minimal classes alone") {
  std::vector<Port> ports = {{"a", unsigned_of(8)}, {"b", unsigned_of(8)}};
  EGraph g;
  g.add_term(parse_term("(+ 9 unsigned 8 unsigned a 8 unsigned b)", &ports));
  g.rebuild();
  CHECK(width_reduction_pass(g) == 0);
}

TEST_CASE("width reduction on the fig1 spec product") {
  Design s = load_design(fixture("fig1_spec.sv"));
  EGraph g;
  Id root = g.add_term(s.body);
  g.rebuild();
  CHECK(width_reduction_pass(g) == 1);
  g.rebuild();
  bool found = false;
  for (const auto& n : g.eclass(root).nodes) {
    if (n.spec.op != Opcode::Zext) continue;
    CHECK(n.operand_anns[0] == unsigned_of(62));
    const ENode& inner = g.eclass(n.children[0]).nodes[0];
    CHECK(inner.spec.op == Opcode::Mul);
    CHECK(inner.out == unsigned_of(62));
    found = true;
  }
  CHECK(found);

  Design small = load_design(fixture("fig1_small_spec.sv"));
  EGraph h;
  h.add_term(small.body);
  h.rebuild();
  CHECK(width_reduction_pass(h) == 1);
  h.rebuild();
  testing::check_graph_sound(h, small.inputs);
}

TEST_CASE("width reduction keeps random graphs sound") {
  std::vector<Port> ports = {{"a", unsigned_of(4)}, {"b", signed_of(4)}, {"c", unsigned_of(3)}};
  testing::RandomTermGen gen(23, ports, 8);
  for (int round = 0; round < 20; ++round) {
    EGraph g;
    for (int i = 0; i < 10; ++i) g.add_term(gen.term(10));
    g.rebuild();
    width_reduction_pass(g);
    g.rebuild();
    testing::check_graph_sound(g, ports);
  }
}
