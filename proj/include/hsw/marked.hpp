#pragma once

#include <utility>

#include "hsw/model.hpp"

namespace hsw {

// Constructions turning a finite two-equivalence-relation structure into
// concrete marked models whose constants (or unitaries) realize the two
// relations through inner-product separations.
//
// Shared conventions: the model dimension equals s.size, marked label k is
// "qk" and names the standard basis vector e_k, and the class-coefficient
// radius r (the "gap") is a rational with
//   - cross-class coefficient distances > 2r for both relations, exactly, and
//   - r <= 1/2.

// Marked model with unit constants a1, a2 whose basis coefficients are
// constant on E1- (resp. E2-) classes, plus a near-orthogonal pair b1, b2
// with 0 < <b1,b2> = epsilon < r. Returns the model and r. Construction
// parameters (r, epsilon) are recorded in model.meta.
std::pair<Model, Rat> build_marked_constants(const EqStructure& s);

// Marked model with unitaries U1..U5: U_i (i = 1, 2) fixes exactly the line
// C*a_i and multiplies its orthogonal complement by a unimodular lambda with
// |1 - lambda| in [1/5, 1/4] (so well above the 1/10 floor); U3, U4, U5 are
// global phases whose full displacements sup_{v in B1} ||Uv - v|| hit the
// calibration targets g3 (<= r/64), g4 = r/8, g5 = r within 1% each. The
// separation margins that make the fuzzy class formulas exact are asserted
// at build time; meta records r, lambda, the phases, and the squared
// achieved displacements. Requires r >= 1/64 (fails for structures whose
// coefficient gaps are too small to calibrate, far beyond desk scale).
Model build_dynamical_interpretation(const EqStructure& s);

// Exact coefficient of the class containing element x (1-based) in the named
// constant of a model built above.
FieldScalar marked_class_coeff(const Model& m, const std::string& constant,
                               int x);

// Reads a rational meta field written by the builders; throws InputError
// when absent.
Rat model_meta_rat(const Model& m, const std::string& key);

}  // namespace hsw
