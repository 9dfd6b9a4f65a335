#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsw/eval.hpp"
#include "hsw/formula.hpp"
#include "hsw/model.hpp"

namespace hsw {

// First-order sentences about two equivalence relations E1, E2 with
// equality, in prenex form with a quantifier-free matrix in disjunctive
// normal form. Negation appears only on atoms; the representation makes
// both shapes structural. Variables are 1-based indices y1, y2, ...;
// an atom may reference a variable beyond the prefix, in which case the
// sentence is implicitly closed by outermost universal quantifiers.

struct FOAtom {
  enum Pred { E1, E2, Eq } pred = E1;
  bool negated = false;
  int lhs = 1, rhs = 1;  // 1-based variable indices
};

struct FOSentence {
  std::vector<bool> prefix_exists;          // outermost first; true = exists
  std::vector<std::vector<FOAtom>> matrix;  // disjunction of conjunctions
  std::string name;                         // display label, may be empty
};

// Highest variable index referenced anywhere (>= prefix length).
int sentence_var_count(const FOSentence& s);

// JSON shape:
//   { "name": "...",                       (optional)
//     "prefix": ["forall", "exists", ...],
//     "matrix": [ [ {"pred": "E1"|"E2"|"eq",
//                    "args": [i, j],
//                    "neg": false }, ... ], ... ] }
// Anything not matching this disjunctive-normal-form shape is rejected as
// an input error; callers must normalize first.
FOSentence sentence_from_json(const nlohmann::json& j);
nlohmann::json sentence_to_json(const FOSentence& s);
FOSentence load_sentence(const std::string& path);

// Compact one-line rendering, e.g. "forall y1 exists y2 . (E1(y1,y2))".
std::string sentence_to_text(const FOSentence& s);

// Fixed validation battery: every quantifier-prefix shape of depth <= 2
// over the atoms E1, E2 and equality, both polarities, exercising every
// translation rule. Deterministic order; names are stable identifiers.
const std::vector<FOSentence>& sentence_battery();

// Truth of rho in s by exhaustive quantifier expansion over {1..s.size};
// free variables are universally closed, consistent with translate_fo.
bool fo_check(const EqStructure& s, const FOSentence& rho);

// Which continuous construction realizes the two relations: unit constants
// with class-constant coefficients (gap formula |<b1,b2>|^2) or commuting
// unitaries with a phase ladder (gap formula sup_v d(U3 v, v)).
enum class Scheme { Constants, Dynamical };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

// Identity of a relation-atom subformula inside a translation: which
// relation it encodes, whether it is the complement form, and the marked
// variable names of the pair it tests.
struct PsiAtom {
  int axis = 1;  // 1 -> a1/U1, 2 -> a2/U2
  bool complement = false;
  std::string y1, y2;
};

// A translated sentence plus the node-identity tables the reduction-based
// evaluator keys on. `gap_formula` is a single shared node: it wraps the
// root as min(gap, body) and reappears wherever the scheme's formulas
// reference the gap value.
struct Translation {
  Scheme scheme = Scheme::Constants;
  FormulaPtr formula;
  FormulaPtr gap_formula;
  std::map<const Formula*, PsiAtom> atoms;
};

// Continuous translation: E_i -> relation formula, not E_i -> complement
// form, equality -> d(y1,y2), inequality -> 1 - d(y1,y2); disjunction ->
// min, conjunction -> max; forall -> sup, exists -> inf over the marked
// sort; free variables sup-closed outermost; root wrapped as
// min(gap-formula, body) unconditionally.
Translation translate_fo(const FOSentence& rho, Scheme scheme);

// The two statements asserting that relation `axis` is realized on the
// marked sort: which = 0 is the complementary-overlap statement
// sup min(psi, psi_c), which = 1 the covering statement
// sup (gap - (psi + psi_c)) with a non-binding cap on the sum. Both
// evaluate to zero exactly on models produced by the builders.
Translation scheme_axiom(Scheme scheme, int axis, int which);

// Certified enclosure of a translated statement on a model realizing the
// scheme for s. Marked quantifiers are expanded exactly; relation atoms
// are evaluated through an invariant reduction that collapses the ball
// quantifier to two radial coordinates, sound only because the model's
// operators are verified (exactly) to have the advertised rank-one-update
// and global-phase shapes first. Width of the result <= eps.
EvalResult interp_eval(const Translation& t, const Model& m,
                       const EqStructure& s, const Rat& eps,
                       long budget = kDefaultEvalBudget);

// Outcome of validating the reduction on one (structure, sentence) pair.
// `agrees` is the headline verdict: the certified continuous value is
// within tol of 0 exactly when the brute-force oracle says the sentence
// holds. When the model cannot support the dichotomy at this tolerance
// (gap not certifiably positive, tol not below half the gap, or the
// separation margins fail), `gap_degenerate` is set, `note` explains, and
// no evaluation is attempted.
struct ReductionReport {
  std::string sentence;
  std::string scheme;
  bool gap_degenerate = false;
  bool fo_truth = false;
  bool continuous_zero = false;
  bool agrees = false;
  bool dichotomy_ok = false;  // value in [0, tol] or [gap - tol, hi]
  Interval value;
  Interval gap;
  Rat tol{0};
  long cost = 0;
  std::string note;
};

// Builds the scheme's model for s and validates rho against the oracle.
// tol <= 0 selects the default of a quarter of the scheme's gap value.
ReductionReport verify_reduction(const EqStructure& s, const FOSentence& rho,
                                 Scheme scheme, const Rat& tol = Rat(0));

// Same, on a caller-supplied model (which must realize the scheme for s).
ReductionReport verify_reduction_on(const Model& m, const EqStructure& s,
                                    const FOSentence& rho, Scheme scheme,
                                    const Rat& tol = Rat(0));

}  // namespace hsw
