#pragma once

#include "hsw/formula.hpp"

namespace hsw {

// |f| as adiff(f, 0), making any formula a valid product operand.
FormulaPtr abs_formula(FormulaPtr f);

// f^2 as |f| * |f|.
FormulaPtr sq_formula(FormulaPtr f);

// |<a,b>|^2 = reip(a,b)^2 + imip(a,b)^2, capped (non-bindingly) by the
// product of the terms' norm bounds.
FormulaPtr abs_ip_sq(TermPtr a, TermPtr b);

// The statement that the dimension equals n:
//   inf_{y1..yn in B1} max( max_i |<yi,yi> - 1|,
//                           sup_{x in B1} |<x,x> - sum_i |<x,yi>|^2| )
// evaluating to 0 exactly on n-dimensional spaces and to a positive value
// otherwise.
FormulaPtr dimension_sentence(int n);

// sup_{v in B1} d(op(v), v), the full displacement of a named operator;
// equals max_j |1 - lambda_j| over the operator's eigenvalues.
FormulaPtr displacement_formula(const std::string& op_name);

}  // namespace hsw
