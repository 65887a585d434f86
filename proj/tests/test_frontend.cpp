#include <doctest.h>

#include <functional>
#include <regex>

#include "random_terms.hpp"
#include "wlec/frontend.hpp"

using namespace wlec;

namespace {

std::string fixture(const std::string& name) { return std::string(WLEC_FIXTURE_DIR) + "/" + name; }

int64_t eval_design(const Design& d, const std::vector<int64_t>& vals) {
  return evaluate(d.body, testing::env_of(d.inputs, vals));
}

// Calls f on every input vector of the design.
void for_all_inputs(const std::vector<Port>& ports, const std::function<void(const std::vector<int64_t>&)>& f) {
  std::vector<int64_t> v;
  for (const auto& p : ports) v.push_back(min_value(p.ann));
  while (true) {
    f(v);
    size_t i = 0;
    for (; i < ports.size(); ++i) {
      if (v[i] < max_value(ports[i].ann)) {
        ++v[i];
        break;
      }
      v[i] = min_value(ports[i].ann);
    }
    if (i == ports.size()) return;
  }
}

int64_t pattern(int64_t v, uint32_t w) { return v & ((int64_t{1} << w) - 1); }
int64_t as_signed(int64_t p, uint32_t w) { return p >= (int64_t{1} << (w - 1)) ? p - (int64_t{1} << w) : p; }

// Checks a one-assign module against a hand-written Verilog-semantics formula.
void check_sv(const std::string& src, const std::function<int64_t(const std::vector<int64_t>&)>& expected) {
  Design d = parse_sv(src);
  for_all_inputs(d.inputs, [&](const std::vector<int64_t>& v) {
    INFO(src);
    REQUIRE(eval_design(d, v) == expected(v));
  });
}

}  // namespace

TEST_CASE("sexpr reader examples") {
  const std::string ports = "(inputs (a 8 unsigned) (b 8 unsigned)) (output y 9 unsigned) ";
  Design d = parse_sexpr("(design add " + ports + "(+ 9 unsigned 8 unsigned a 8 unsigned b))");
  REQUIRE(d.body->is_op());
  CHECK(d.body->spec.op == Opcode::Add);
  CHECK(d.body->out == unsigned_of(9));

  Design p = parse_sexpr("(design pass (inputs (a 8 unsigned)) (output y 8 unsigned) (var a 8 unsigned))");
  CHECK(p.body->is_var());

  CHECK_THROWS_AS(parse_sexpr("(design add " + ports + "(+ 9 unsigned 8 unsigned a))"), ParseError);
  CHECK_THROWS_AS(parse_sexpr("(design add " + ports + "(+ 9 unsigned 8 unsigned a 8 unsigned q))"), ParseError);
  CHECK_THROWS_AS(parse_sexpr("(design c (inputs) (output y 4 unsigned) (const 16 4 unsigned))"), ParseError);
  try {
    parse_sexpr("(design add " + ports + "\n  (+ 9 unsigned 8 unsigned a 8 unsigned b)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
  }
}

TEST_CASE("sexpr round trip is token identical") {
  testing::RandomTermGen gen(7, {{"a", unsigned_of(5)}, {"b", signed_of(3)}, {"c", unsigned_of(2)}});
  auto norm = [](const std::string& s) { return std::regex_replace(s, std::regex("\\s+"), " "); };
  for (int i = 0; i < 200; ++i) {
    Design d = gen.design(15);
    std::string text = emit_sexpr(d);
    Design back = parse_sexpr(text);
    CHECK(norm(emit_sexpr(back)) == norm(text));
    CHECK(terms_equal(back.body, d.body));
  }
}

TEST_CASE("fig1 sources parse to the expected shapes") {
  Design s = load_design(fixture("fig1_spec.sv"));
  CHECK(s.inputs.size() == 4);
  CHECK(s.input_names() == std::vector<std::string>{"A", "B", "M", "N"});
  CHECK(format_term(s.body) ==
        "(* 63 unsigned 31 unsigned (<< 31 unsigned 16 unsigned (var A 16 unsigned) 4 unsigned (var M 4 unsigned)) "
        "31 unsigned (<< 31 unsigned 16 unsigned (var B 16 unsigned) 4 unsigned (var N 4 unsigned)))");

  Design i = load_design(fixture("fig1_impl.sv"));
  CHECK(format_term(i.body) ==
        "(<< 63 unsigned 32 unsigned (* 32 unsigned 16 unsigned (var A 16 unsigned) 16 unsigned (var B 16 unsigned)) "
        "5 unsigned (+ 5 unsigned 4 unsigned (var M 4 unsigned) 4 unsigned (var N 4 unsigned)))");

  // Direct evaluation against the Verilog meaning of the spec module.
  testing::RandomTermGen gen(3, s.inputs);
  for (int k = 0; k < 2000; ++k) {
    auto v = gen.vector_for(s.inputs);
    Wide dd = (static_cast<Wide>(v[0]) << v[2]) & ((Wide{1} << 31) - 1);
    Wide ee = (static_cast<Wide>(v[1]) << v[3]) & ((Wide{1} << 31) - 1);
    Wide o = (dd * ee) & ((Wide{1} << 63) - 1);
    CHECK(eval_design(s, v) == static_cast<int64_t>(o));
  }
}

TEST_CASE("passthrough assign") {
  Design d = parse_sv("module p(input [7:0] a, output [7:0] c);\n  assign c = a;\nendmodule\n");
  CHECK(d.body->is_var());
  CHECK(d.body->name == "a");
}

TEST_CASE("verilog sizing and signedness rules") {
  const std::string hdr_sa = "module m(a, b, y);\n  input signed [3:0] a;\n  input [3:0] b;\n";
  check_sv(hdr_sa + "  output [7:0] y;\n  assign y = a + b;\nendmodule",
           [](auto& v) { return pattern(pattern(v[0], 4) + v[1], 8); });
  check_sv(hdr_sa + "  output signed [7:0] y;\n  assign y = a >> 1;\nendmodule",
           [](auto& v) { return as_signed(pattern(v[0], 8) >> 1, 8); });
  check_sv(hdr_sa + "  output signed [7:0] y;\n  assign y = a >>> 1;\nendmodule",
           [](auto& v) { return v[0] >> 1; });
  check_sv(hdr_sa + "  output signed [7:0] y;\n  assign y = a >>> b;\nendmodule",
           [](auto& v) { return v[0] >> std::min<int64_t>(v[1], 63); });
  check_sv(hdr_sa + "  output y;\n  assign y = a < b;\nendmodule",
           [](auto& v) { return int64_t{pattern(v[0], 4) < v[1]}; });
  check_sv(hdr_sa + "  output y;\n  assign y = a >= $signed(b);\nendmodule",
           [](auto& v) { return int64_t{v[0] >= as_signed(v[1], 4)}; });
  check_sv(hdr_sa + "  output y;\n  assign y = a != 4'sd3;\nendmodule", [](auto& v) { return int64_t{v[0] != 3}; });
  check_sv(hdr_sa + "  output [2:0] y;\n  assign y = a * b;\nendmodule",
           [](auto& v) { return pattern(v[0] * v[1], 3); });
  check_sv(hdr_sa + "  output signed [9:0] y;\n  assign y = -a;\nendmodule", [](auto& v) { return -v[0]; });
  check_sv(hdr_sa + "  output [9:0] y;\n  assign y = ~b;\nendmodule", [](auto& v) { return pattern(~v[1], 10); });
  check_sv(hdr_sa + "  output [5:0] y;\n  assign y = {a[2:1], b[3], 1'b1};\nendmodule", [](auto& v) {
    return ((pattern(v[0], 4) >> 1 & 3) << 2) | ((v[1] >> 3) << 1) | 1;
  });
  check_sv(hdr_sa + "  output [4:0] y;\n  assign y = b[0] ? b + 1 : -b;\nendmodule",
           [](auto& v) { return (v[1] & 1) ? v[1] + 1 : pattern(-v[1], 5); });
  check_sv(hdr_sa + "  output signed [7:0] y;\n  assign y = $signed(b);\nendmodule",
           [](auto& v) { return as_signed(v[1], 4); });
  check_sv(hdr_sa + "  output [7:0] y;\n  assign y = $unsigned(a);\nendmodule",
           [](auto& v) { return pattern(v[0], 4); });
  check_sv(hdr_sa + "  output [7:0] y;\n  assign y = a;\nendmodule", [](auto& v) { return pattern(v[0], 8); });
  check_sv(hdr_sa + "  output [1:0] y;\n  assign y = 7;\nendmodule", [](auto&) { return int64_t{3}; });
  check_sv(hdr_sa + "  output [7:0] y;\n  assign y = (b << 2) >> 1;\nendmodule",
           [](auto& v) { return (v[1] << 2) >> 1; });
  check_sv(hdr_sa + "  output [3:0] y;\n  assign y = (b << 2) >> 1;\nendmodule",
           [](auto& v) { return pattern(v[1] << 2, 4) >> 1; });
}

TEST_CASE("wire forms, always_comb and ANSI headers") {
  const char* src =
      "module m(input logic [3:0] a, b, output logic [5:0] y);\n"
      "  logic [4:0] s;\n"
      "  wire [5:0] t = s + 6'd1;\n"
      "  always_comb begin\n"
      "    s = a + b;\n"
      "  end\n"
      "  assign y = t;\n"
      "endmodule\n";
  check_sv(src, [](auto& v) { return v[0] + v[1] + 1; });
}

TEST_CASE("sv reader errors") {
  auto err = [](const std::string& body) {
    std::string src = "module m(input [3:0] a, output [3:0] y);\n" + body + "\nendmodule\n";
    try {
      parse_sv(src);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(err("  wire [3:0] p, q;\n  assign p = q;\n  assign q = p;\n  assign y = p;").find("cycle") !=
        std::string::npos);
  CHECK(err("  assign y = a;\n  assign y = a;").find("multiply driven") != std::string::npos);
  CHECK(err("  wire [3:0] p;\n  assign y = p;").find("never driven") != std::string::npos);
  CHECK(err("  always @(*) y = a;").find("unsupported construct") != std::string::npos);
  CHECK(err("  assign y = a && a;").find("unsupported construct") != std::string::npos);
  CHECK(err("  assign y = {2{a[1:0]}};").find("unsupported construct") != std::string::npos);
  CHECK(err("  assign y = a / a;").find("division") != std::string::npos);
  CHECK(err("  assign y = q;").find("undeclared") != std::string::npos);
  CHECK(err("  assign y = a[4:0];").find("range") != std::string::npos);
  CHECK_THROWS_AS(parse_sv("module m(input [3:0] a, output y, output z);\nassign y = a;\nassign z = a;\nendmodule"),
                  ParseError);
}

TEST_CASE("emit_sv of the fig1 implementation") {
  Design i = load_design(fixture("fig1_impl.sv"));
  std::string sv = emit_sv(i);
  size_t assigns = 0;
  for (size_t p = sv.find("assign"); p != std::string::npos; p = sv.find("assign", p + 1)) ++assigns;
  CHECK(assigns == 3);
  CHECK(sv.find("assign O = ") != std::string::npos);
  Design back = parse_sv(sv);
  CHECK(terms_equal(back.body, i.body));

  Design p = parse_sv("module p(input [7:0] a, output [7:0] O);\n  assign O = a;\nendmodule\n");
  CHECK(emit_sv(p).find("assign O = a;") != std::string::npos);
}

TEST_CASE("emit_sv semantic round trip on random designs") {
  std::vector<Port> ports = {{"a", unsigned_of(4)}, {"b", signed_of(3)}, {"c", unsigned_of(3)}};
  testing::RandomTermGen gen(11, ports, 7);
  for (int i = 0; i < 300; ++i) {
    Design d = gen.design(20);
    std::string sv = emit_sv(d);
    Design back = parse_sv(sv);
    REQUIRE(back.inputs == d.inputs);
    REQUIRE(back.output.ann == d.output.ann);
    for_all_inputs(ports, [&](const std::vector<int64_t>& v) {
      INFO(sv);
      INFO(format_term(d.body));
      REQUIRE(eval_design(back, v) == eval_design(d, v));
    });
  }
}
