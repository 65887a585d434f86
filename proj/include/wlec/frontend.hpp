#pragma once

// Design containers plus readers/writers for the S-expression IR and the
// combinational SystemVerilog subset.

#include <string>
#include <string_view>
#include <vector>

#include "wlec/ir.hpp"

namespace wlec {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

struct Port {
  std::string name;
  Annotation ann;

  friend bool operator==(const Port&, const Port&) = default;
};

/// A single-output combinational design.
struct Design {
  std::string name;
  std::vector<Port> inputs;
  Port output;
  TermPtr body;

  std::vector<std::string> input_names() const;
  uint32_t total_input_bits() const;
};

/// Checks port uniqueness, body/output agreement and that every variable is a
/// declared input with the declared annotation. Throws ParseError.
void validate_design(const Design& d);

/// Parses a `(design NAME (inputs ...) (output ...) TERM)` file.
Design parse_sexpr(std::string_view text);
/// Parses a lone TERM; variables are checked against `ports` when given.
TermPtr parse_term(std::string_view text, const std::vector<Port>* ports = nullptr);
std::string emit_sexpr(const Design& d);

Design parse_sv(std::string_view text);
std::string emit_sv(const Design& d);

/// Reads a design file, choosing the reader from the extension (.sv/.v or .ir).
Design load_design(const std::string& path);
std::string read_file(const std::string& path);

}  // namespace wlec
