#include <doctest.h>

#include "wlec/assistant.hpp"

using namespace wlec;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

const std::vector<std::string> kPairs = {"fig1",  "fig1_small",   "fig4",   "vbsme4",    "vbsme4_small",
                                         "vbsme8", "vbsme8_small", "fir8",   "fir8_small", "box",
                                         "box_small", "adpcm",     "adpcm_small"};

bool is_box(const std::string& n) { return n.starts_with("box"); }

}  // namespace

TEST_CASE("IR and SV forms of every fixture agree") {
  for (const auto& n : kPairs) {
    for (const char* side : {"_spec", "_impl"}) {
      CAPTURE(n + side);
      Design sv = load_design(fixture(n + side + ".sv"));
      Design ir = load_design(fixture(n + side + ".ir"));
      CHECK(sv.name == ir.name);
      CHECK(sv.inputs == ir.inputs);
      CHECK(sv.output == ir.output);
      CHECK(terms_equal(sv.body, ir.body));
    }
  }
}

TEST_CASE("every fixture pair is equivalent") {
  for (const auto& n : kPairs) {
    CAPTURE(n);
    Design s = load_design(fixture(n + "_spec.sv"));
    Design i = load_design(fixture(n + "_impl.sv"));
    OracleConfig cfg;
    cfg.samples = 20000;
    Verdict v = check_equiv(s, i, cfg);
    if (n.ends_with("_small") || n == "fig4") {
      CHECK(s.total_input_bits() <= 16);
      CHECK(v.status == VerdictStatus::Pass);
      CHECK(v.method == CheckMethod::Exhaustive);
    } else {
      CHECK(v.status != VerdictStatus::Fail);
    }
  }
}

TEST_CASE("saturation finds a full path on every benchmark except the box filter") {
  for (const auto& n : kPairs) {
    CAPTURE(n);
    RunConfig cfg;
    cfg.spec_path = fixture(n + "_spec.sv");
    cfg.impl_path = fixture(n + "_impl.sv");
    cfg.oracle.samples = 200;
    cfg.oracle.trivial_samples = 50;
    RunResult r = run_assistant(cfg);
    CHECK(r.adjacency_violations.empty());
    if (is_box(n)) {
      CHECK_FALSE(r.saturation.roots_merged);
      CHECK(r.shared_final > r.shared_initial);
      CHECK(r.waterfall.has_center());
    } else {
      CHECK(r.saturation.roots_merged);
      CHECK(r.saturation.iterations.size() <= 5);
      CHECK_FALSE(r.waterfall.has_center());
    }
    if (n.ends_with("_small") || n == "fig4") CHECK(r.exit_code() == 0);
  }
}
