#pragma once

#include <map>
#include <memory>
#include <string>

#include "hsw/interval.hpp"

namespace hsw {

// Sort of a term: Ball(r) is the radius-r ball of the ambient Hilbert space,
// Marked is the discrete sort of marked basis labels.
struct Sort {
  enum Kind { Ball, Marked } kind = Ball;
  int radius = 1;

  static Sort ball(int r) { return Sort{Ball, r}; }
  static Sort marked() { return Sort{Marked, 0}; }
  bool is_ball() const { return kind == Ball; }
  bool operator==(const Sort& o) const {
    return kind == o.kind && (kind == Marked || radius == o.radius);
  }
  std::string str() const {
    return kind == Marked ? "Q" : "B" + std::to_string(radius);
  }
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Vector-valued term. Lipschitz data maps each free continuous variable v to
// L with ||t(..v..) - t(..v'..)|| <= L ||v - v'||, and each operator name to
// its total sensitivity weight (sum of argument norms at application sites).
struct Term {
  enum Kind { Var, Zero, Add, Sub, Scale, Apply, ApplyInv, Qu, Const } kind;
  std::string name;  // Var/Const identifier; Apply/ApplyInv operator name,
                     // where "#k" refers to the model's k-th operator (1-based,
                     // lexicographic) as produced by the w[...] sugar
  TermPtr lhs, rhs;
  Rat sc_re, sc_im;  // Scale coefficient re + im*i
  Sort sort;
  Rat norm_bound;  // sound bound on the term's norm, often below the radius
  std::map<std::string, Rat> lip;
  std::map<std::string, Rat> opsens;
};

TermPtr t_var(const std::string& name, Sort sort);
TermPtr t_zero(Sort sort);
TermPtr t_const(const std::string& name);
TermPtr t_add(TermPtr a, TermPtr b);
TermPtr t_sub(TermPtr a, TermPtr b);
TermPtr t_scale(const Rat& re, const Rat& im, TermPtr t);
TermPtr t_apply(const std::string& op, TermPtr t);
TermPtr t_apply_inv(const std::string& op, TermPtr t);
TermPtr t_qu(TermPtr t);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Real-valued formula with a static range and the same two modulus maps as
// terms. Construction functions validate sorts and caps and precompute all
// annotations; malformed combinations throw InputError.
struct Formula {
  enum Kind {
    D, ReIP, ImIP, RatConst, Half, TruncSub, Min, Max,
    AbsDiff, Neg, TruncAdd, Prod, Sup, Inf
  } kind;
  TermPtr t1, t2;
  Rat q;  // RatConst value; Neg / TruncAdd cap
  FormulaPtr f1, f2;
  std::string var;
  Sort vsort;
  Interval range;
  std::map<std::string, Rat> lip;
  std::map<std::string, Rat> opsens;

  bool is_quantifier() const { return kind == Sup || kind == Inf; }
};

FormulaPtr mk_d(TermPtr a, TermPtr b);
FormulaPtr mk_reip(TermPtr a, TermPtr b);
FormulaPtr mk_imip(TermPtr a, TermPtr b);
FormulaPtr mk_rat(const Rat& q);
FormulaPtr mk_half(FormulaPtr f);
FormulaPtr mk_truncsub(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_min(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_max(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_absdiff(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_neg(const Rat& cap, FormulaPtr f);
FormulaPtr mk_truncadd(const Rat& cap, FormulaPtr a, FormulaPtr b);
FormulaPtr mk_prod(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_sup(const std::string& var, Sort sort, FormulaPtr body);
FormulaPtr mk_inf(const std::string& var, Sort sort, FormulaPtr body);

// Rebuilds the annotation layer bottom-up and returns the freshly annotated
// formula; also the sanity check that stored annotations match derived ones.
FormulaPtr infer_ranges(const FormulaPtr& f);

std::string print_term(const TermPtr& t);
std::string print_formula(const FormulaPtr& f);

// Free variables (quantifier-unbound identifiers) cannot occur in terms
// produced by the parser: unbound identifiers parse as named constants.
// Bound-variable and constant name sets are still useful for validation.
std::map<std::string, Sort> formula_constants(const FormulaPtr& f);
std::map<std::string, Rat> formula_opsens(const FormulaPtr& f);

}  // namespace hsw
