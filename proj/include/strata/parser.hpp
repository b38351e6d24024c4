#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "strata/ast.hpp"
#include "strata/errors.hpp"

namespace strata {

/// One validation failure with enough context to locate it.
struct Violation {
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Parses program text without validating it. Statements end with `.`,
/// comments run from `%` to end of line. Throws ParseError on syntax errors.
Program parse_program_unchecked(std::string_view text);

/// Validates arity consistency, duplicate declarations, rule safety,
/// existential-variable placement, constraint shape, and @source arities.
ValidationReport check_safety(const Program& program);

/// parse_program_unchecked followed by check_safety; throws ValidationError
/// if the report is non-empty.
Program parse_program(std::string_view text);

/// Parses a single ground atom line `p(c1,...,cn) .` for fact files.
/// Returns false on a blank/comment-only line.
bool parse_fact_line(std::string_view line, std::size_t line_number,
                     Atom& out);

}  // namespace strata
