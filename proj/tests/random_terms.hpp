#pragma once

// Random well-formed terms for property tests.

#include <random>
#include <vector>

#include "wlec/frontend.hpp"
#include "wlec/ir.hpp"

namespace wlec::testing {

struct RandomTermGen {
  std::mt19937_64 rng;
  std::vector<Port> inputs;
  uint32_t max_width = 8;

  explicit RandomTermGen(uint64_t seed, std::vector<Port> ins, uint32_t maxw = 8)
      : rng(seed), inputs(std::move(ins)), max_width(maxw) {}

  uint32_t pick(uint32_t lo, uint32_t hi) { return std::uniform_int_distribution<uint32_t>(lo, hi)(rng); }

  Annotation ann() { return {pick(1, max_width), pick(0, 1) ? Signage::Signed : Signage::Unsigned}; }

  TermPtr leaf() {
    if (pick(0, 3) == 0) {
      Annotation a = ann();
      std::uniform_int_distribution<int64_t> v(min_value(a), max_value(a));
      return make_const(v(rng), a);
    }
    const Port& p = inputs[pick(0, static_cast<uint32_t>(inputs.size() - 1))];
    return make_var(p.name, p.ann);
  }

  // About `nodes` operator nodes; operand annotations are random, so the
  // generated terms exercise truncation and extension on every edge.
  TermPtr term(int nodes) {
    if (nodes <= 0) return leaf();
    Opcode op = kAllOpcodes[pick(0, static_cast<uint32_t>(std::size(kAllOpcodes) - 1))];
    size_t n = arity(op);
    int budget = nodes - 1;
    std::vector<Operand> ops;
    for (size_t i = 0; i < n; ++i) {
      int share = (i + 1 == n) ? budget : static_cast<int>(pick(0, static_cast<uint32_t>(std::max(budget, 0))));
      budget -= share;
      TermPtr c = term(share);
      Annotation a = pick(0, 2) == 0 ? c->out : ann();
      if (is_shift(op) && i == 1) a = {pick(1, 4), a.sign};
      ops.push_back({a, c});
    }
    OpSpec spec{op, 0, 0};
    if (op == Opcode::Slice) {
      spec.lo = pick(0, ops[0].ann.width + 1);
      spec.hi = spec.lo + pick(0, 4);
    }
    Annotation out = ann();
    if (op == Opcode::Eq || op == Opcode::Lt) out = pick(0, 1) ? unsigned_of(1) : out;
    return make_op(spec, out, std::move(ops));
  }

  Design design(int nodes) {
    Design d;
    d.name = "rnd";
    d.inputs = inputs;
    TermPtr body = term(nodes);
    d.output = {"y", body->out};
    d.body = body;
    return d;
  }

  std::vector<int64_t> vector_for(const std::vector<Port>& ports) {
    std::vector<int64_t> v;
    for (const auto& p : ports) {
      std::uniform_int_distribution<int64_t> d(min_value(p.ann), max_value(p.ann));
      v.push_back(d(rng));
    }
    return v;
  }
};

inline Environment env_of(const std::vector<Port>& ports, const std::vector<int64_t>& vals) {
  Environment e;
  for (size_t i = 0; i < ports.size(); ++i) e.bind(ports[i].name, ports[i].ann, vals[i]);
  return e;
}

}  // namespace wlec::testing
