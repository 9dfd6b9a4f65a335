#include "hsw/formula.hpp"

#include <vector>

#include "hsw/errors.hpp"

namespace hsw {

namespace {

using ModMap = std::map<std::string, Rat>;

ModMap map_add(const ModMap& a, const ModMap& b) {
  ModMap out = a;
  for (const auto& [k, v] : b) out[k] += v;
  return out;
}

ModMap map_max(const ModMap& a, const ModMap& b) {
  ModMap out = a;
  for (const auto& [k, v] : b) {
    auto it = out.find(k);
    if (it == out.end()) out[k] = v;
    else it->second = rat_max(it->second, v);
  }
  return out;
}

ModMap map_scale(const ModMap& a, const Rat& c) {
  ModMap out;
  for (const auto& [k, v] : a) out[k] = v * c;
  return out;
}

// Weighted sum c1*a + c2*b, the bilinear combination rule.
ModMap map_combine(const ModMap& a, const Rat& c1, const ModMap& b, const Rat& c2) {
  return map_add(map_scale(a, c1), map_scale(b, c2));
}

// Rational upper bound on |re + im*i|, exact when one part vanishes.
Rat modulus_hi(const Rat& re, const Rat& im) {
  if (im == 0) return rat_abs(re);
  if (re == 0) return rat_abs(im);
  return rat_sqrt(re * re + im * im, 48).hi;
}

Rat term_norm_bound(const TermPtr& t) {
  if (t->sort.kind != Sort::Ball)
    throw InternalError("term_norm_bound on marked term");
  return t->norm_bound;
}

void require_ball(const TermPtr& t, const char* what) {
  if (t->sort.kind != Sort::Ball)
    throw InputError(std::string(what) + " requires a ball-sorted argument, got sort Q");
}

std::shared_ptr<Term> base_term(Term::Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}

std::shared_ptr<Formula> base_formula(Formula::Kind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}

}  // namespace

TermPtr t_var(const std::string& name, Sort sort) {
  if (name.empty()) throw InputError("variable name must be nonempty");
  auto t = base_term(Term::Var);
  t->name = name;
  t->sort = sort;
  if (sort.is_ball()) {
    t->norm_bound = sort.radius;
    t->lip[name] = 1;
  }
  return t;
}

TermPtr t_zero(Sort sort) {
  if (!sort.is_ball()) throw InputError("the zero vector has no marked sort; use 0:B1");
  auto t = base_term(Term::Zero);
  t->sort = sort;
  t->norm_bound = 0;
  return t;
}

TermPtr t_const(const std::string& name) {
  if (name.empty()) throw InputError("constant name must be nonempty");
  auto t = base_term(Term::Const);
  t->name = name;
  t->sort = Sort::ball(1);
  t->norm_bound = 1;
  return t;
}

TermPtr t_add(TermPtr a, TermPtr b) {
  require_ball(a, "add");
  require_ball(b, "add");
  auto t = base_term(Term::Add);
  t->sort = Sort::ball(a->sort.radius + b->sort.radius);
  t->norm_bound = a->norm_bound + b->norm_bound;
  t->lip = map_add(a->lip, b->lip);
  t->opsens = map_add(a->opsens, b->opsens);
  t->lhs = std::move(a);
  t->rhs = std::move(b);
  return t;
}

TermPtr t_sub(TermPtr a, TermPtr b) {
  require_ball(a, "sub");
  require_ball(b, "sub");
  auto t = base_term(Term::Sub);
  t->sort = Sort::ball(a->sort.radius + b->sort.radius);
  t->norm_bound = a->norm_bound + b->norm_bound;
  t->lip = map_add(a->lip, b->lip);
  t->opsens = map_add(a->opsens, b->opsens);
  t->lhs = std::move(a);
  t->rhs = std::move(b);
  return t;
}

TermPtr t_scale(const Rat& re, const Rat& im, TermPtr inner) {
  require_ball(inner, "scale");
  // Sort radius grows by the least integer k >= 1 with |c| <= k.
  Rat m2 = re * re + im * im;
  long k = 1;
  while (Rat(k) * Rat(k) < m2) ++k;
  Rat chi = modulus_hi(re, im);
  auto t = base_term(Term::Scale);
  t->sc_re = re;
  t->sc_im = im;
  t->sort = Sort::ball(static_cast<int>(k) * inner->sort.radius);
  t->norm_bound = chi * inner->norm_bound;
  t->lip = map_scale(inner->lip, chi);
  t->opsens = map_scale(inner->opsens, chi);
  t->lhs = std::move(inner);
  return t;
}

namespace {

TermPtr apply_common(Term::Kind kind, const std::string& op, TermPtr inner) {
  if (op.empty()) throw InputError("operator name must be nonempty");
  if (!(inner->sort == Sort::ball(1)))
    throw InputError("operator application requires a B1 argument, got sort " +
                     inner->sort.str());
  auto t = base_term(kind);
  t->name = op;
  t->sort = Sort::ball(1);
  t->norm_bound = inner->norm_bound;  // operators are unitary
  t->lip = inner->lip;
  t->opsens = inner->opsens;
  t->opsens[op] += inner->norm_bound;  // ||U t - U' t|| <= ||U - U'|| ||t||
  t->lhs = std::move(inner);
  return t;
}

}  // namespace

TermPtr t_apply(const std::string& op, TermPtr inner) {
  return apply_common(Term::Apply, op, std::move(inner));
}

TermPtr t_apply_inv(const std::string& op, TermPtr inner) {
  if (!op.empty() && op[0] == '#')
    throw InputError("inverse application cannot use word indices");
  return apply_common(Term::ApplyInv, op, std::move(inner));
}

TermPtr t_qu(TermPtr inner) {
  if (inner->sort.kind != Sort::Marked)
    throw InputError("qu requires a marked-sorted argument, got sort " +
                     inner->sort.str());
  auto t = base_term(Term::Qu);
  t->sort = Sort::ball(1);
  t->norm_bound = 1;  // marked vectors are unit
  t->lhs = std::move(inner);
  return t;
}

FormulaPtr mk_d(TermPtr a, TermPtr b) {
  bool am = a->sort.kind == Sort::Marked;
  bool bm = b->sort.kind == Sort::Marked;
  if (am != bm)
    throw InputError("d cannot mix ball and marked sorts: " + a->sort.str() +
                     " vs " + b->sort.str());
  auto f = base_formula(Formula::D);
  if (am) {
    f->range = Interval(Rat(0), Rat(1));  // discrete metric
  } else {
    f->range = Interval(Rat(0), term_norm_bound(a) + term_norm_bound(b));
    f->lip = map_add(a->lip, b->lip);
    f->opsens = map_add(a->opsens, b->opsens);
  }
  f->t1 = std::move(a);
  f->t2 = std::move(b);
  return f;
}

namespace {

FormulaPtr ip_common(Formula::Kind kind, TermPtr a, TermPtr b) {
  const char* what = kind == Formula::ReIP ? "reip" : "imip";
  require_ball(a, what);
  require_ball(b, what);
  Rat ra = term_norm_bound(a), rb = term_norm_bound(b);
  auto f = base_formula(kind);
  f->range = Interval(-ra * rb, ra * rb);
  // |<u,v> - <u',v'>| <= ||u-u'|| ||v|| + ||u'|| ||v-v'||
  f->lip = map_combine(a->lip, rb, b->lip, ra);
  f->opsens = map_combine(a->opsens, rb, b->opsens, ra);
  f->t1 = std::move(a);
  f->t2 = std::move(b);
  return f;
}

}  // namespace

FormulaPtr mk_reip(TermPtr a, TermPtr b) {
  return ip_common(Formula::ReIP, std::move(a), std::move(b));
}

FormulaPtr mk_imip(TermPtr a, TermPtr b) {
  return ip_common(Formula::ImIP, std::move(a), std::move(b));
}

FormulaPtr mk_rat(const Rat& q) {
  auto f = base_formula(Formula::RatConst);
  f->q = q;
  f->range = Interval(q, q);
  return f;
}

FormulaPtr mk_half(FormulaPtr inner) {
  auto f = base_formula(Formula::Half);
  f->range = iscale(rat_frac(1, 2), inner->range);
  f->lip = map_scale(inner->lip, rat_frac(1, 2));
  f->opsens = map_scale(inner->opsens, rat_frac(1, 2));
  f->f1 = std::move(inner);
  return f;
}

FormulaPtr mk_truncsub(FormulaPtr a, FormulaPtr b) {
  auto f = base_formula(Formula::TruncSub);
  f->range = (a->range - b->range).clamp_nonneg();
  f->lip = map_add(a->lip, b->lip);
  f->opsens = map_add(a->opsens, b->opsens);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

FormulaPtr mk_min(FormulaPtr a, FormulaPtr b) {
  auto f = base_formula(Formula::Min);
  f->range = imin(a->range, b->range);
  f->lip = map_max(a->lip, b->lip);
  f->opsens = map_max(a->opsens, b->opsens);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

FormulaPtr mk_max(FormulaPtr a, FormulaPtr b) {
  auto f = base_formula(Formula::Max);
  f->range = imax(a->range, b->range);
  f->lip = map_max(a->lip, b->lip);
  f->opsens = map_max(a->opsens, b->opsens);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

FormulaPtr mk_absdiff(FormulaPtr a, FormulaPtr b) {
  auto f = base_formula(Formula::AbsDiff);
  f->range = (a->range - b->range).abs();
  f->lip = map_add(a->lip, b->lip);
  f->opsens = map_add(a->opsens, b->opsens);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

FormulaPtr mk_neg(const Rat& cap, FormulaPtr inner) {
  if (cap < inner->range.hi)
    throw InputError("not[" + rat_to_string(cap) +
                     "] cap is below the operand's upper range bound " +
                     rat_to_string(inner->range.hi));
  auto f = base_formula(Formula::Neg);
  f->q = cap;
  f->range = Interval(cap - inner->range.hi, cap - inner->range.lo);
  f->lip = inner->lip;
  f->opsens = inner->opsens;
  f->f1 = std::move(inner);
  return f;
}

FormulaPtr mk_truncadd(const Rat& cap, FormulaPtr a, FormulaPtr b) {
  if (cap < 0)
    throw InputError("plus[" + rat_to_string(cap) + "] cap must be nonnegative");
  auto f = base_formula(Formula::TruncAdd);
  f->q = cap;
  Interval s = a->range + b->range;
  f->range = Interval(rat_min(cap, s.lo), rat_min(cap, s.hi));
  f->lip = map_add(a->lip, b->lip);
  f->opsens = map_add(a->opsens, b->opsens);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

FormulaPtr mk_prod(FormulaPtr a, FormulaPtr b) {
  if (a->range.lo < 0 || b->range.lo < 0)
    throw InputError("product operands must have nonnegative ranges, got [" +
                     a->range.str() + "] * [" + b->range.str() + "]");
  auto f = base_formula(Formula::Prod);
  f->range = Interval(a->range.lo * b->range.lo, a->range.hi * b->range.hi);
  // On [0,A] x [0,B] the product is (B,A)-Lipschitz componentwise.
  f->lip = map_combine(a->lip, b->range.hi, b->lip, a->range.hi);
  f->opsens = map_combine(a->opsens, b->range.hi, b->opsens, a->range.hi);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}

namespace {

FormulaPtr quant_common(Formula::Kind kind, const std::string& var, Sort sort,
                        FormulaPtr body) {
  if (var.empty()) throw InputError("quantifier variable name must be nonempty");
  auto f = base_formula(kind);
  f->var = var;
  f->vsort = sort;
  f->range = body->range;
  f->lip = body->lip;
  f->lip.erase(var);
  f->opsens = body->opsens;
  f->f1 = std::move(body);
  return f;
}

}  // namespace

FormulaPtr mk_sup(const std::string& var, Sort sort, FormulaPtr body) {
  return quant_common(Formula::Sup, var, sort, std::move(body));
}

FormulaPtr mk_inf(const std::string& var, Sort sort, FormulaPtr body) {
  return quant_common(Formula::Inf, var, sort, std::move(body));
}

namespace {

TermPtr rebuild_term(const TermPtr& t) {
  switch (t->kind) {
    case Term::Var: return t_var(t->name, t->sort);
    case Term::Zero: return t_zero(t->sort);
    case Term::Const: return t_const(t->name);
    case Term::Add: return t_add(rebuild_term(t->lhs), rebuild_term(t->rhs));
    case Term::Sub: return t_sub(rebuild_term(t->lhs), rebuild_term(t->rhs));
    case Term::Scale: return t_scale(t->sc_re, t->sc_im, rebuild_term(t->lhs));
    case Term::Apply: return t_apply(t->name, rebuild_term(t->lhs));
    case Term::ApplyInv: return t_apply_inv(t->name, rebuild_term(t->lhs));
    case Term::Qu: return t_qu(rebuild_term(t->lhs));
  }
  throw InternalError("rebuild_term: bad kind");
}

}  // namespace

FormulaPtr infer_ranges(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::D: return mk_d(rebuild_term(f->t1), rebuild_term(f->t2));
    case Formula::ReIP: return mk_reip(rebuild_term(f->t1), rebuild_term(f->t2));
    case Formula::ImIP: return mk_imip(rebuild_term(f->t1), rebuild_term(f->t2));
    case Formula::RatConst: return mk_rat(f->q);
    case Formula::Half: return mk_half(infer_ranges(f->f1));
    case Formula::TruncSub:
      return mk_truncsub(infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::Min: return mk_min(infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::Max: return mk_max(infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::AbsDiff:
      return mk_absdiff(infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::Neg: return mk_neg(f->q, infer_ranges(f->f1));
    case Formula::TruncAdd:
      return mk_truncadd(f->q, infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::Prod: return mk_prod(infer_ranges(f->f1), infer_ranges(f->f2));
    case Formula::Sup: return mk_sup(f->var, f->vsort, infer_ranges(f->f1));
    case Formula::Inf: return mk_inf(f->var, f->vsort, infer_ranges(f->f1));
  }
  throw InternalError("infer_ranges: bad kind");
}

namespace {

std::string gaussian_str(const Rat& re, const Rat& im) {
  if (im == 0) return rat_to_string(re);
  std::string ipart;
  Rat ia = rat_abs(im);
  if (ia == 1) ipart = "i";
  else ipart = rat_to_string(ia) + "i";
  if (re == 0) return (im < 0 ? "-" : "") + ipart;
  return rat_to_string(re) + (im < 0 ? "-" : "+") + ipart;
}

void term_str(const TermPtr& t, std::string& out) {
  switch (t->kind) {
    case Term::Var:
    case Term::Const:
      out += t->name;
      return;
    case Term::Zero:
      out += "0:" + t->sort.str();
      return;
    case Term::Add:
    case Term::Sub:
      out += t->kind == Term::Add ? "add(" : "sub(";
      term_str(t->lhs, out);
      out += ", ";
      term_str(t->rhs, out);
      out += ")";
      return;
    case Term::Scale:
      out += "scale(" + gaussian_str(t->sc_re, t->sc_im) + ", ";
      term_str(t->lhs, out);
      out += ")";
      return;
    case Term::Qu:
      out += "qu(";
      term_str(t->lhs, out);
      out += ")";
      return;
    case Term::ApplyInv:
      out += t->name + "~(";
      term_str(t->lhs, out);
      out += ")";
      return;
    case Term::Apply: {
      if (t->name[0] == '#') {
        // Regenerate the word sugar from a maximal chain of index applications.
        std::vector<std::string> idx;
        TermPtr tail = t;
        while (tail->kind == Term::Apply && tail->name[0] == '#') {
          idx.push_back(tail->name.substr(1));
          tail = tail->lhs;
        }
        out += "w[";
        for (size_t i = 0; i < idx.size(); ++i) {
          if (i) out += ",";
          out += idx[i];
        }
        out += "](";
        term_str(tail, out);
        out += ")";
        return;
      }
      out += t->name + "(";
      term_str(t->lhs, out);
      out += ")";
      return;
    }
  }
  throw InternalError("term_str: bad kind");
}

// Precedence levels: quantifiers 0, '-.' 1, '*' 2, atoms 3. A child is
// parenthesized when its level is below the context's minimum.
int formula_prec(const Formula& f) {
  switch (f.kind) {
    case Formula::Sup:
    case Formula::Inf: return 0;
    case Formula::TruncSub: return 1;
    case Formula::Prod: return 2;
    default: return 3;
  }
}

void formula_str(const FormulaPtr& f, int ctx, std::string& out) {
  if (formula_prec(*f) < ctx) {
    out += "(";
    formula_str(f, 0, out);
    out += ")";
    return;
  }
  switch (f->kind) {
    case Formula::D:
    case Formula::ReIP:
    case Formula::ImIP: {
      out += f->kind == Formula::D ? "d(" : (f->kind == Formula::ReIP ? "reip(" : "imip(");
      term_str(f->t1, out);
      out += ", ";
      term_str(f->t2, out);
      out += ")";
      return;
    }
    case Formula::RatConst:
      out += rat_to_string(f->q);
      return;
    case Formula::Half:
      out += "half(";
      formula_str(f->f1, 0, out);
      out += ")";
      return;
    case Formula::TruncSub:
      formula_str(f->f1, 1, out);
      out += " -. ";
      formula_str(f->f2, 2, out);
      return;
    case Formula::Min:
    case Formula::Max:
    case Formula::AbsDiff: {
      out += f->kind == Formula::Min ? "min(" : (f->kind == Formula::Max ? "max(" : "adiff(");
      formula_str(f->f1, 0, out);
      out += ", ";
      formula_str(f->f2, 0, out);
      out += ")";
      return;
    }
    case Formula::Neg:
      out += "not[" + rat_to_string(f->q) + "](";
      formula_str(f->f1, 0, out);
      out += ")";
      return;
    case Formula::TruncAdd:
      out += "plus[" + rat_to_string(f->q) + "](";
      formula_str(f->f1, 0, out);
      out += ", ";
      formula_str(f->f2, 0, out);
      out += ")";
      return;
    case Formula::Prod:
      formula_str(f->f1, 2, out);
      out += " * ";
      formula_str(f->f2, 3, out);
      return;
    case Formula::Sup:
    case Formula::Inf:
      out += f->kind == Formula::Sup ? "sup " : "inf ";
      out += f->var + ":" + f->vsort.str() + ". ";
      formula_str(f->f1, 0, out);
      return;
  }
  throw InternalError("formula_str: bad kind");
}

void collect_constants(const TermPtr& t, std::map<std::string, Sort>& out) {
  if (!t) return;
  if (t->kind == Term::Const) out[t->name] = t->sort;
  collect_constants(t->lhs, out);
  collect_constants(t->rhs, out);
}

void collect_constants(const FormulaPtr& f, std::map<std::string, Sort>& out) {
  if (!f) return;
  collect_constants(f->t1, out);
  collect_constants(f->t2, out);
  collect_constants(f->f1, out);
  collect_constants(f->f2, out);
}

}  // namespace

std::string print_term(const TermPtr& t) {
  std::string out;
  term_str(t, out);
  return out;
}

std::string print_formula(const FormulaPtr& f) {
  std::string out;
  formula_str(f, 0, out);
  return out;
}

std::map<std::string, Sort> formula_constants(const FormulaPtr& f) {
  std::map<std::string, Sort> out;
  collect_constants(f, out);
  return out;
}

std::map<std::string, Rat> formula_opsens(const FormulaPtr& f) {
  return f->opsens;
}

}  // namespace hsw
