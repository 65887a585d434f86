#include "wlec/proof.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace wlec {

namespace {

CheckerHint hint_for(const std::vector<Rule>& rules, const std::string& id) {
  const Rule* r = find_rule(rules, id);
  if (!r) r = find_rule(catalogue(), id);
  return r ? r->hint : CheckerHint::Simulation;
}

RewriteStep reversed(RewriteStep s) {
  std::swap(s.before, s.after);
  s.forward = !s.forward;
  return s;
}

// Operator children whose value is always exact get their exact annotation.
TermPtr relabel_children(const TermPtr& t) {
  if (!t->is_op()) return t;
  std::vector<Operand> ops = t->operands;
  bool changed = false;
  for (auto& o : ops) {
    const TermPtr& c = o.term;
    if (!c->is_op()) continue;
    std::vector<Annotation> anns;
    std::vector<Range> full;
    for (const auto& co : c->operands) {
      anns.push_back(co.ann);
      full.push_back(full_range(co.ann));
    }
    Annotation e = exact_width(c->spec, anns);
    if (e == c->out || !valid_annotation(e)) continue;
    auto r = exact_range(c->spec, anns, full);
    if (!r || !representable(r->lo, c->out) || !representable(r->hi, c->out)) continue;
    o.term = make_op(c->spec, e, c->operands);
    changed = true;
  }
  return changed ? make_op(t->spec, t->out, std::move(ops)) : t;
}

std::optional<std::string> check_rule_step(const RewriteStep& s, const std::vector<Rule>& rules, const TermPtr& lhs,
                                           const TermPtr& rhs) {
  const Rule* r = find_rule(rules, s.rule);
  if (!r) r = find_rule(catalogue(), s.rule);
  if (!r) return fmt::format("unknown rule '{}'", s.rule);
  auto m = match_pattern(r->lhs, lhs);
  if (!m) return fmt::format("'{}' left-hand side does not match {}", s.rule, format_term(lhs));
  for (const auto& [k, v] : s.params) {
    auto it = m->params.find(k);
    if (it == m->params.end() || it->second != v) return fmt::format("'{}' parameter ?{} disagrees", s.rule, k);
  }
  TermPtr inst;
  try {
    inst = instantiate(r->rhs, *m);
  } catch (const Error& e) {
    return fmt::format("'{}' right-hand side cannot be built: {}", s.rule, e.what());
  }
  if (!terms_equal(inst, rhs)) {
    return fmt::format("'{}' right-hand side is {}, expected {}", s.rule, format_term(rhs), format_term(inst));
  }
  return std::nullopt;
}

std::optional<std::string> check_width_reduce(const TermPtr& op, const TermPtr& ext) {
  if (!op->is_op() || !ext->is_op()) return "width reduction needs operator terms";
  Opcode want = op->out.is_signed() ? Opcode::Sext : Opcode::Zext;
  if (ext->spec.op != want || ext->out != op->out) return "width reduction wrapper has the wrong shape";
  Annotation narrow = ext->operands[0].ann;
  if (narrow.sign != op->out.sign || narrow.width >= op->out.width) return "width reduction does not narrow";
  if (!terms_equal(ext->operands[0].term, make_op(op->spec, narrow, op->operands))) {
    return "width reduction changes more than the output width";
  }
  return std::nullopt;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::Rule:
      return "rule";
    case StepKind::WidthReduce:
      return "width-reduce";
    case StepKind::WidthRelabel:
      return "width-relabel";
  }
  return "?";
}

std::string_view to_string(Obligation::Kind k) {
  switch (k) {
    case Obligation::Kind::Step:
      return "step";
    case Obligation::Kind::Center:
      return "center";
    case Obligation::Kind::AssumeGuarantee:
      return "assume-guarantee";
  }
  return "?";
}

std::vector<RewriteStep> explain_terms(EGraph& g, const TermPtr& a, const TermPtr& b,
                                       const std::vector<Rule>& rules) {
  Id ia = g.add_term(a);
  Id ib = g.add_term(b);
  if (g.find(ia) != g.find(ib)) throw Error("cannot explain terms from different classes");
  std::vector<RewriteStep> out;
  for (auto& e : g.explain(ia, ib)) {
    RewriteStep s;
    s.forward = e.forward;
    s.position = e.position;
    s.before = e.before;
    s.after = e.after;
    s.params = e.just.params;
    if (e.just.kind == Justification::Kind::WidthReduce) {
      s.kind = StepKind::WidthReduce;
      s.rule = "width-reduce";
    } else {
      s.kind = StepKind::Rule;
      s.rule = e.just.rule;
      s.hint = hint_for(rules, s.rule);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TermPtr> Waterfall::spec_chain() const {
  std::vector<TermPtr> out = {spec.body};
  for (const auto& s : spec_steps) out.push_back(s.after);
  return out;
}

std::vector<TermPtr> Waterfall::impl_chain() const {
  std::vector<TermPtr> out = {impl_star};
  for (const auto& s : impl_steps) out.push_back(s.after);
  return out;
}

std::vector<Obligation> Waterfall::obligations() const {
  std::vector<Obligation> out;
  auto add_steps = [&](const std::vector<RewriteStep>& steps, const char* chain) {
    for (const auto& s : steps) {
      out.push_back({Obligation::Kind::Step, chain, s.rule, s.hint, s.before, s.after, {}});
    }
  };
  add_steps(spec_steps, "spec");
  if (has_center()) {
    out.push_back({Obligation::Kind::Center, "center", "center", CheckerHint::ExternalStrong, spec_star, impl_star, {}});
  }
  add_steps(impl_steps, "impl");
  Obligation ag{Obligation::Kind::AssumeGuarantee, "assume-guarantee", "assume-guarantee", CheckerHint::Trivial,
                spec.body, impl.body, {}};
  for (size_t i = 0; i < out.size(); ++i) ag.premises.push_back(i);
  out.push_back(std::move(ag));
  return out;
}

Waterfall build_waterfall(EGraph& g, const Design& spec, const Design& impl, const ExtractionResult& x,
                          const std::vector<Rule>& rules) {
  Waterfall w;
  w.spec = spec;
  w.impl = impl;
  w.spec_star = x.spec;
  w.impl_star = x.impl;
  w.spec_steps = explain_terms(g, spec.body, x.spec, rules);
  for (auto& s : explain_terms(g, impl.body, x.impl, rules)) w.impl_steps.push_back(reversed(std::move(s)));
  std::reverse(w.impl_steps.begin(), w.impl_steps.end());
  return w;
}

Waterfall insert_width_normalization_steps(const Waterfall& w, const std::vector<Rule>& rules) {
  auto expand = [&](const std::vector<RewriteStep>& steps) {
    std::vector<RewriteStep> out;
    for (const auto& s : steps) {
      const Rule* r = s.kind == StepKind::Rule ? find_rule(rules, s.rule) : nullptr;
      if (!r) r = s.kind == StepKind::Rule ? find_rule(catalogue(), s.rule) : nullptr;
      if (!r || r->hint != CheckerHint::ExternalStrong) {
        out.push_back(s);
        continue;
      }
      const TermPtr& lhs_full = s.forward ? s.before : s.after;
      TermPtr lhs = subterm_at(lhs_full, s.position);
      TermPtr rhs = subterm_at(s.forward ? s.after : s.before, s.position);
      TermPtr norm = relabel_children(lhs);
      auto m = norm == lhs ? std::nullopt : match_term(*r, norm);
      std::optional<TermPtr> rhs2;
      if (m) {
        try {
          rhs2 = instantiate(r->rhs, *m);
        } catch (const Error&) {
        }
      }
      if (!rhs2 || !terms_equal(*rhs2, rhs)) {
        out.push_back(s);
        continue;
      }
      TermPtr mid = replace_at(lhs_full, s.position, norm);
      RewriteStep hop{StepKind::WidthRelabel, "width-relabel", {}, true, s.position, lhs_full, mid,
                      CheckerHint::Simulation};
      RewriteStep step = s;
      step.params = m->params;
      if (s.forward) {
        step.before = mid;
        out.push_back(hop);
        out.push_back(step);
      } else {
        step.after = mid;
        out.push_back(step);
        out.push_back(reversed(hop));
      }
    }
    return out;
  };
  Waterfall n = w;
  n.spec_steps = expand(w.spec_steps);
  n.impl_steps = expand(w.impl_steps);
  return n;
}

std::optional<std::string> check_step(const RewriteStep& s, const std::vector<Rule>& rules) {
  TermPtr sb, sa;
  try {
    sb = subterm_at(s.before, s.position);
    sa = subterm_at(s.after, s.position);
  } catch (const Error&) {
    return fmt::format("position {} is not in both terms", format_position(s.position));
  }
  if (terms_equal(sb, sa)) return "step changes nothing";
  if (!terms_equal(replace_at(s.before, s.position, sa), s.after)) {
    return fmt::format("terms differ outside position {}", format_position(s.position));
  }
  const TermPtr& from = s.forward ? sb : sa;
  const TermPtr& to = s.forward ? sa : sb;
  switch (s.kind) {
    case StepKind::Rule:
      return check_rule_step(s, rules, from, to);
    case StepKind::WidthReduce:
      return check_width_reduce(from, to);
    case StepKind::WidthRelabel:
      if (!terms_equal(relabel_children(from), to)) return "relabel does not match the exact widths";
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> check_adjacency(const Waterfall& w, const std::vector<Rule>& rules) {
  std::vector<std::string> out;
  auto chain = [&](const std::vector<RewriteStep>& steps, const TermPtr& first, const TermPtr& last,
                   const char* name) {
    TermPtr cur = first;
    for (size_t i = 0; i < steps.size(); ++i) {
      if (!terms_equal(steps[i].before, cur)) out.push_back(fmt::format("{} step {}: does not continue the chain", name, i));
      if (auto e = check_step(steps[i], rules)) out.push_back(fmt::format("{} step {}: {}", name, i, *e));
      cur = steps[i].after;
    }
    if (!terms_equal(cur, last)) out.push_back(fmt::format("{} chain ends at the wrong design", name));
  };
  chain(w.spec_steps, w.spec.body, w.spec_star, "spec");
  chain(w.impl_steps, w.impl_star, w.impl.body, "impl");
  return out;
}

nlohmann::json write_waterfall(const Waterfall& w, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "steps");
  size_t counter = 0;
  auto emit = [&](const TermPtr& t, const std::string& chain, const std::string& label) {
    std::string stem = fmt::format("{:03}_{}_{}", counter, chain, sanitize(label));
    Design d{fmt::format("{}_{:03}", chain, counter), w.spec.inputs, w.spec.output, t};
    ++counter;
    std::ofstream(dir / "steps" / (stem + ".sv")) << emit_sv(d);
    std::ofstream(dir / "steps" / (stem + ".ir")) << emit_sexpr(d);
    return "steps/" + stem;
  };

  std::vector<std::string> spec_files, impl_files;
  auto spec_terms = w.spec_chain();
  for (size_t k = 0; k < spec_terms.size(); ++k) {
    spec_files.push_back(emit(spec_terms[k], "spec", k == 0 ? "source" : w.spec_steps[k - 1].rule));
  }
  auto impl_terms = w.impl_chain();
  for (size_t k = 0; k < impl_terms.size(); ++k) {
    impl_files.push_back(emit(impl_terms[k], "impl", k == 0 ? "extracted" : w.impl_steps[k - 1].rule));
  }

  nlohmann::json m;
  m["designs"] = nlohmann::json::array();
  for (const auto& f : spec_files) m["designs"].push_back(f);
  for (const auto& f : impl_files) m["designs"].push_back(f);
  m["spec_steps"] = w.spec_steps.size();
  m["impl_steps"] = w.impl_steps.size();
  m["center"] = w.has_center();
  m["obligations"] = nlohmann::json::array();
  size_t si = 0, ii = 0;
  auto obligations = w.obligations();
  for (size_t i = 0; i < obligations.size(); ++i) {
    const Obligation& o = obligations[i];
    std::string left, right;
    switch (o.kind) {
      case Obligation::Kind::Step:
        if (o.chain == "spec") {
          left = spec_files[si], right = spec_files[si + 1];
          ++si;
        } else {
          left = impl_files[ii], right = impl_files[ii + 1];
          ++ii;
        }
        break;
      case Obligation::Kind::Center:
        left = spec_files.back(), right = impl_files.front();
        break;
      case Obligation::Kind::AssumeGuarantee:
        left = spec_files.front(), right = impl_files.back();
        break;
    }
    nlohmann::json j = {{"index", i},
                        {"kind", std::string(to_string(o.kind))},
                        {"chain", o.chain},
                        {"rule", o.rule},
                        {"checker_hint", std::string(to_string(o.hint))},
                        {"left", left + ".sv"},
                        {"right", right + ".sv"}};
    if (o.kind == Obligation::Kind::AssumeGuarantee) j["premises"] = o.premises;
    m["obligations"].push_back(std::move(j));
  }
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  return m;
}

}  // namespace wlec
