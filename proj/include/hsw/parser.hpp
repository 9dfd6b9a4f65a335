#pragma once

#include <string>

#include "hsw/formula.hpp"

namespace hsw {

// Parses a formula from source text. Whitespace is free-form and '#' starts a
// line comment. Unbound identifiers in term position become named constants
// resolved against the model at evaluation time. Throws InputError with
// line/column positions on malformed input.
FormulaPtr parse_formula_text(const std::string& src);

// Term-only entry point, used by tests and by sentence builders.
TermPtr parse_term_text(const std::string& src);

}  // namespace hsw
