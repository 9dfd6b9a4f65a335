#include "hsw/interp.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <tuple>
#include <utility>

#include "hsw/errors.hpp"
#include "hsw/field.hpp"
#include "hsw/marked.hpp"
#include "hsw/matrix.hpp"
#include "hsw/sentences.hpp"

namespace hsw {

namespace {

const char* pred_name(FOAtom::Pred p) {
  switch (p) {
    case FOAtom::E1: return "E1";
    case FOAtom::E2: return "E2";
    default: return "eq";
  }
}

void validate_sentence(const FOSentence& s) {
  if (s.prefix_exists.size() > 8)
    throw InputError("sentence quantifier prefix is limited to 8 variables");
  if (s.matrix.empty())
    throw InputError(
        "sentence matrix must be a nonempty disjunction of conjunctions");
  for (const auto& conj : s.matrix) {
    if (conj.empty())
      throw InputError("sentence matrix conjunctions must not be empty");
    for (const auto& a : conj) {
      if (a.lhs < 1 || a.rhs < 1 || a.lhs > 8 || a.rhs > 8)
        throw InputError("sentence variables must be indices in y1..y8");
    }
  }
}

bool atom_holds(const EqStructure& s, const FOAtom& a,
                const std::vector<int>& asg) {
  int u = asg[a.lhs], v = asg[a.rhs];
  bool h = a.pred == FOAtom::Eq
               ? u == v
               : partition_related(a.pred == FOAtom::E1 ? s.e1 : s.e2, u, v);
  return h != a.negated;
}

bool matrix_holds(const EqStructure& s, const FOSentence& rho,
                  const std::vector<int>& asg) {
  for (const auto& conj : rho.matrix) {
    bool all = true;
    for (const auto& a : conj)
      if (!atom_holds(s, a, asg)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

bool fo_rec(const EqStructure& s, const FOSentence& rho,
            const std::vector<std::pair<int, bool>>& quants, size_t i,
            std::vector<int>& asg) {
  if (i == quants.size()) return matrix_holds(s, rho, asg);
  auto [var, exists] = quants[i];
  for (int v = 1; v <= s.size; ++v) {
    asg[var] = v;
    bool sub = fo_rec(s, rho, quants, i + 1, asg);
    if (exists && sub) return true;
    if (!exists && !sub) return false;
  }
  return !exists;
}

std::string var_name(int k) { return "y" + std::to_string(k); }

TermPtr marked_var(int k) { return t_var(var_name(k), Sort::marked()); }

TermPtr delta_qu(int u, int v) {
  return t_sub(t_qu(marked_var(u)), t_qu(marked_var(v)));
}

FormulaPtr gap_formula_for(Scheme scheme) {
  return scheme == Scheme::Constants
             ? abs_ip_sq(t_const("b1"), t_const("b2"))
             : displacement_formula("U3");
}

// Shared-node builder for the relation and equality literals of one
// translation. Identical literals reuse one node, so the evaluator's
// node-identity tables stay small.
struct Builder {
  Scheme scheme = Scheme::Constants;
  FormulaPtr gap;
  FormulaPtr disp4_sq, disp5_sq;  // dynamical branch thresholds, squared
  std::map<const Formula*, PsiAtom>* atoms = nullptr;
  std::map<std::tuple<int, int, int, int>, FormulaPtr> built;
};

Builder make_builder(Translation& t) {
  Builder b;
  b.scheme = t.scheme;
  b.gap = t.gap_formula;
  b.atoms = &t.atoms;
  if (t.scheme == Scheme::Dynamical) {
    b.disp4_sq = sq_formula(displacement_formula("U4"));
    b.disp5_sq = sq_formula(displacement_formula("U5"));
  }
  return b;
}

FormulaPtr relation_formula(Builder& b, int axis, bool complement, int u,
                            int v) {
  if (b.scheme == Scheme::Constants) {
    FormulaPtr psi =
        abs_ip_sq(delta_qu(u, v), t_const(axis == 1 ? "a1" : "a2"));
    (*b.atoms)[psi.get()] = PsiAtom{axis, false, var_name(u), var_name(v)};
    // complement form: whatever the pair formula misses of the gap value
    return complement ? mk_truncsub(b.gap, psi) : psi;
  }
  TermPtr uv = t_var("u", Sort::ball(1));
  FormulaPtr off_axis =
      mk_max(mk_d(t_apply(axis == 1 ? "U1" : "U2", uv), uv),
             mk_absdiff(mk_rat(Rat(1)), mk_d(uv, t_zero(Sort::ball(1)))));
  FormulaPtr branch1 = mk_truncsub(b.gap, off_axis);
  FormulaPtr ip = abs_ip_sq(delta_qu(u, v), uv);
  FormulaPtr branch2 = complement ? mk_truncsub(b.disp5_sq, ip)
                                  : mk_truncsub(ip, b.disp4_sq);
  FormulaPtr psi = mk_sup("u", Sort::ball(1), mk_min(branch1, branch2));
  (*b.atoms)[psi.get()] = PsiAtom{axis, complement, var_name(u), var_name(v)};
  return psi;
}

FormulaPtr literal_formula(Builder& b, const FOAtom& a) {
  auto key = std::make_tuple(static_cast<int>(a.pred), a.negated ? 1 : 0,
                             a.lhs, a.rhs);
  auto it = b.built.find(key);
  if (it != b.built.end()) return it->second;
  FormulaPtr f;
  if (a.pred == FOAtom::Eq) {
    FormulaPtr d = mk_d(marked_var(a.lhs), marked_var(a.rhs));
    f = a.negated ? mk_neg(Rat(1), d) : d;
  } else {
    f = relation_formula(b, a.pred == FOAtom::E1 ? 1 : 2, a.negated, a.lhs,
                         a.rhs);
  }
  b.built.emplace(key, f);
  return f;
}

// ---------------------------------------------------------------------
// Reduction-based evaluation.
//
// Relation atoms quantify over the unit ball, but on models whose axis
// operators are exact rank-one phase updates the integrand depends on u
// only through x = |<a_i, u>| and y = ||u - <a_i,u> a_i||: the operator
// displacement is delta1 * y exactly, and for a fixed (x, y) the reachable
// values of |<qu(y1) - qu(y2), u>| form the interval
//   [sigma_min, x*g + m*y],  g = |coeff difference|, m = sqrt(2 - g^2),
// with sigma_min = max(0, x*g - m*y) when the ball has at least two
// directions orthogonal to a_i, |x*g - m*y| when it has exactly one, and
// x*g when it has none. The ball quantifier therefore collapses to a
// two-variable supremum over {x, y >= 0, x^2 + y^2 <= 1}, solved by
// branch-and-bound on exact rational boxes.

struct AtomCtx {
  Scheme scheme = Scheme::Constants;
  const Model* model = nullptr;
  int n = 0;
  std::array<std::vector<int>, 2> cls;            // element -> class, per axis
  std::array<std::vector<FieldScalar>, 2> coeff;  // class coefficient, per axis
  FieldReal min_sep;  // smallest squared cross-class coefficient distance
  bool has_cross = false;
  Interval gap;
  // dynamical calibration, verified against the operators exactly
  Rat delta1_sq{0}, g3_sq{0}, g4_sq{0}, g5_sq{0};
  Interval g3, delta1;
  Rat atom_eps{0};
  long budget = 0;
  long cost = 0;
  std::map<std::tuple<int, int, int, int>, Interval> cache;
};

void charge(AtomCtx& ctx, long k) {
  ctx.cost += k;
  if (ctx.cost > ctx.budget)
    throw BudgetError("interpretation evaluation budget exhausted", "", "",
                      "exceeded " + std::to_string(ctx.budget) +
                          " node evaluations");
}

void fill_classes(const std::vector<std::vector<int>>& classes, int n,
                  std::vector<int>& cls) {
  cls.assign(n, -1);
  for (size_t ci = 0; ci < classes.size(); ++ci)
    for (int x : classes[ci]) {
      if (x < 1 || x > n || cls[x - 1] != -1)
        throw InputError("equivalence classes must partition 1..size");
      cls[x - 1] = static_cast<int>(ci);
    }
  for (int v : cls)
    if (v == -1)
      throw InputError("equivalence classes must partition 1..size");
}

const FVec& model_constant(const Model& m, const std::string& name) {
  auto it = m.constants.find(name);
  if (it == m.constants.end())
    throw InputError("model is missing constant " + name);
  return it->second;
}

const FMat& model_unitary(const Model& m, const std::string& name) {
  auto it = m.operators.find(name);
  if (it == m.operators.end())
    throw InputError("model is missing operator " + name);
  return it->second;
}

FieldScalar meta_scalar(const Model& m, const std::string& key) {
  if (!m.meta.contains(key) || !m.meta[key].is_string())
    throw InputError("dynamical reduction requires construction metadata " +
                     key);
  return FieldScalar::decode(m.meta[key].get<std::string>());
}

FMat rank_one_phase_update(const FieldScalar& lambda, const FVec& a) {
  size_t n = a.size();
  FMat m = fmat_scale(lambda, fmat_identity(n));
  FieldScalar w = FieldScalar::one() - lambda;
  for (size_t r = 0; r < n; ++r)
    for (size_t c = 0; c < n; ++c) m[r][c] = m[r][c] + w * a[r] * a[c].conj();
  return m;
}

AtomCtx build_ctx(const Model& m, const EqStructure& s, Scheme scheme) {
  AtomCtx ctx;
  ctx.scheme = scheme;
  ctx.model = &m;
  ctx.n = s.size;
  if (m.dim != s.size)
    throw InputError("model dimension must equal the structure size");
  if (static_cast<int>(m.marked.size()) != m.dim)
    throw InputError("model must mark a full orthonormal basis");
  const FieldReal one = FieldReal::from_rat(Rat(1));
  for (int ax = 0; ax < 2; ++ax) {
    const auto& classes = ax == 0 ? s.e1 : s.e2;
    const std::string cname = ax == 0 ? "a1" : "a2";
    fill_classes(classes, ctx.n, ctx.cls[ax]);
    const FVec& a = model_constant(m, cname);
    if (fvec_norm2(a) != one)
      throw InputError("constant " + cname + " must be a unit vector");
    ctx.coeff[ax].resize(classes.size());
    for (size_t ci = 0; ci < classes.size(); ++ci) {
      ctx.coeff[ax][ci] = a[classes[ci][0] - 1];
      for (int x : classes[ci])
        if (a[x - 1] != ctx.coeff[ax][ci])
          throw InputError("constant " + cname +
                           " must be constant on equivalence classes");
    }
    for (size_t ci = 0; ci < classes.size(); ++ci)
      for (size_t cj = ci + 1; cj < classes.size(); ++cj) {
        FieldReal d2 = (ctx.coeff[ax][ci] - ctx.coeff[ax][cj]).abs2();
        if (!ctx.has_cross || d2 < ctx.min_sep) ctx.min_sep = d2;
        ctx.has_cross = true;
      }
  }
  if (scheme == Scheme::Constants) {
    const FVec& b1 = model_constant(m, "b1");
    const FVec& b2 = model_constant(m, "b2");
    if (fvec_norm2(b1) > one || fvec_norm2(b2) > one)
      throw InputError("constants b1, b2 must lie in the unit ball");
    ctx.gap = field_real_enclosure(fvec_inner(b1, b2).abs2());
    return ctx;
  }
  FieldScalar lambda = meta_scalar(m, "lambda");
  std::array<FieldScalar, 3> mu = {meta_scalar(m, "mu3"),
                                   meta_scalar(m, "mu4"),
                                   meta_scalar(m, "mu5")};
  ctx.delta1_sq = model_meta_rat(m, "delta1_sq");
  ctx.g3_sq = model_meta_rat(m, "g3_sq");
  ctx.g4_sq = model_meta_rat(m, "g4_sq");
  ctx.g5_sq = model_meta_rat(m, "g5_sq");
  if (lambda.abs2() != one)
    throw InputError("metadata lambda must be unimodular");
  for (int ax = 0; ax < 2; ++ax) {
    const FVec& a = model_constant(m, ax == 0 ? "a1" : "a2");
    const FMat& u = model_unitary(m, ax == 0 ? "U1" : "U2");
    if (!fmat_equal(u, rank_one_phase_update(lambda, a)))
      throw InputError(
          "operator U" + std::to_string(ax + 1) +
          " does not act as the advertised rank-one phase update");
  }
  for (int k = 0; k < 3; ++k) {
    if (mu[k].abs2() != one)
      throw InputError("metadata mu" + std::to_string(k + 3) +
                       " must be unimodular");
    const FMat& u = model_unitary(m, "U" + std::to_string(k + 3));
    if (!fmat_equal(u, fmat_scale(mu[k], fmat_identity(ctx.n))))
      throw InputError("operator U" + std::to_string(k + 3) +
                       " is not the advertised global phase");
  }
  if ((FieldScalar::one() - lambda).abs2() != FieldReal::from_rat(ctx.delta1_sq))
    throw InputError("metadata delta1_sq does not match the operators");
  const std::array<Rat, 3> gsq = {ctx.g3_sq, ctx.g4_sq, ctx.g5_sq};
  for (int k = 0; k < 3; ++k)
    if ((FieldScalar::one() - mu[k]).abs2() != FieldReal::from_rat(gsq[k]))
      throw InputError("metadata g" + std::to_string(k + 3) +
                       "_sq does not match the operators");
  ctx.g3 = rat_sqrt(ctx.g3_sq, 80);
  ctx.delta1 = rat_sqrt(ctx.delta1_sq, 80);
  ctx.gap = ctx.g3;
  return ctx;
}

// Enclosure of the reduced integrand over a coordinate box intersected
// with the unit quarter-disc (the intersection is what the caller bounds;
// evaluating over the full box is sound, clamping the norm at 1 tightens).
Interval box_value(const AtomCtx& ctx, bool complement, const Interval& g,
                   const Interval& mI, const Interval& x, const Interval& y) {
  static const Rat kSqrtSlack = rat_pow2(-60);
  Interval n2 = x * x + y * y;
  n2 = Interval(n2.lo, rat_min(n2.hi, Rat(1)));
  Interval dev =
      (Interval::point(Rat(1)) - isqrt_enclosure(n2, kSqrtSlack)).abs();
  Interval b1 = (ctx.g3 - imax(ctx.delta1 * y, dev)).clamp_nonneg();
  Interval b2;
  if (!complement) {
    Interval smax = x * g + mI * y;
    b2 = (smax * smax - Interval::point(ctx.g4_sq)).clamp_nonneg();
  } else {
    Interval diff = x * g - mI * y;
    Interval smin = ctx.n >= 3 ? diff.clamp_nonneg() : diff.abs();
    b2 = (Interval::point(ctx.g5_sq) - smin * smin).clamp_nonneg();
  }
  return imin(b1, b2);
}

Interval reduced_sup(AtomCtx& ctx, bool complement, const FieldReal& g_sq,
                     const FieldReal& m_sq) {
  Interval g = field_real_sqrt(g_sq, 80).clamp_nonneg();
  Interval mI = field_real_sqrt(m_sq, 80).clamp_nonneg();
  const Rat ycap = ctx.n >= 2 ? Rat(1) : Rat(0);

  struct Node {
    Rat ub;
    Interval x, y;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.ub < b.ub; };
  std::vector<Node> heap;
  Rat best_lo(0);  // integrand is truncated at 0, so 0 is always attained

  auto consider = [&](const Interval& x, const Interval& y) {
    if (x.lo * x.lo + y.lo * y.lo > 1) return;  // box misses the ball
    charge(ctx, 1);
    Interval v = box_value(ctx, complement, g, mI, x, y);
    best_lo = rat_max(best_lo, v.lo);
    heap.push_back(Node{v.hi, x, y});
    std::push_heap(heap.begin(), heap.end(), cmp);
  };

  consider(Interval(Rat(0), Rat(1)), Interval(Rat(0), ycap));
  // exact probes at the axis direction, the origin, and mixed points
  consider(Interval::point(Rat(1)), Interval::point(Rat(0)));
  consider(Interval::point(Rat(0)), Interval::point(Rat(0)));
  if (ycap > 0) {
    consider(Interval::point(Rat(0)), Interval::point(Rat(1)));
    consider(Interval::point(rat_frac(3, 5)), Interval::point(rat_frac(4, 5)));
    consider(Interval::point(rat_frac(1, 2)), Interval::point(rat_frac(1, 2)));
  }

  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Node top = heap.back();
    heap.pop_back();
    if (top.ub - best_lo <= ctx.atom_eps)
      return Interval(best_lo, rat_max(best_lo, top.ub));
    Rat wx = top.x.width(), wy = top.y.width();
    if (wx == 0 && wy == 0)
      throw InternalError("atom reduction cannot refine a point box");
    if (wx >= wy) {
      Rat mid = top.x.mid();
      consider(Interval(top.x.lo, mid), top.y);
      consider(Interval(mid, top.x.hi), top.y);
    } else {
      Rat mid = top.y.mid();
      consider(top.x, Interval(top.y.lo, mid));
      consider(top.x, Interval(mid, top.y.hi));
    }
  }
  throw InternalError("atom reduction ran out of boxes without converging");
}

Interval atom_value(AtomCtx& ctx, const PsiAtom& at, int lu, int lv) {
  int ax = at.axis - 1;
  int cu = ctx.cls[ax][lu], cv = ctx.cls[ax][lv];
  int ku, kv;
  if (lu == lv) {
    ku = kv = -2;  // identical labels: zero difference vector
  } else if (cu == cv) {
    ku = kv = -1;  // equivalent pair: zero coefficient difference
  } else {
    ku = std::min(cu, cv);
    kv = std::max(cu, cv);
  }
  auto key = std::make_tuple(at.axis, at.complement ? 1 : 0, ku, kv);
  auto it = ctx.cache.find(key);
  if (it != ctx.cache.end()) return it->second;

  Interval v;
  if (ctx.scheme == Scheme::Constants) {
    Interval psi =
        ku >= 0 ? field_real_enclosure(
                      (ctx.coeff[ax][cu] - ctx.coeff[ax][cv]).abs2())
                : Interval::point(Rat(0));
    v = at.complement ? (ctx.gap - psi).clamp_nonneg() : psi;
  } else {
    FieldReal g_sq = ku >= 0 ? (ctx.coeff[ax][cu] - ctx.coeff[ax][cv]).abs2()
                             : FieldReal();
    FieldReal m_sq = ku == -2 ? FieldReal()
                              : FieldReal::from_rat(Rat(2)) - g_sq;
    v = reduced_sup(ctx, at.complement, g_sq, m_sq);
  }
  ctx.cache.emplace(key, v);
  return v;
}

Interval ev_node(const Translation& t, const FormulaPtr& f, AtomCtx& ctx,
                 std::map<std::string, int>& asg) {
  charge(ctx, 1);
  const Formula* p = f.get();
  if (t.gap_formula && p == t.gap_formula.get())
    return imeet(ctx.gap, p->range);
  if (auto it = t.atoms.find(p); it != t.atoms.end()) {
    const PsiAtom& at = it->second;
    auto lu = asg.find(at.y1);
    auto lv = asg.find(at.y2);
    if (lu == asg.end() || lv == asg.end())
      throw InternalError("relation atom references an unbound variable");
    return imeet(atom_value(ctx, at, lu->second, lv->second), p->range);
  }
  Interval v;
  switch (p->kind) {
    case Formula::RatConst:
      v = Interval::point(p->q);
      break;
    case Formula::D: {
      auto label = [&](const TermPtr& tm) {
        if (!tm || tm->kind != Term::Var || tm->sort.kind != Sort::Marked)
          throw InternalError(
              "translated equality atoms compare marked variables");
        auto it = asg.find(tm->name);
        if (it == asg.end())
          throw InternalError("equality atom references an unbound variable");
        return it->second;
      };
      v = Interval::point(Rat(label(p->t1) == label(p->t2) ? 0 : 1));
      break;
    }
    case Formula::Neg:
      v = Interval::point(p->q) - ev_node(t, p->f1, ctx, asg);
      break;
    case Formula::Half:
      v = iscale(rat_frac(1, 2), ev_node(t, p->f1, ctx, asg));
      break;
    case Formula::TruncSub:
      v = (ev_node(t, p->f1, ctx, asg) - ev_node(t, p->f2, ctx, asg))
              .clamp_nonneg();
      break;
    case Formula::TruncAdd:
      v = imin(ev_node(t, p->f1, ctx, asg) + ev_node(t, p->f2, ctx, asg),
               Interval::point(p->q));
      break;
    case Formula::AbsDiff:
      v = (ev_node(t, p->f1, ctx, asg) - ev_node(t, p->f2, ctx, asg)).abs();
      break;
    case Formula::Min:
      v = imin(ev_node(t, p->f1, ctx, asg), ev_node(t, p->f2, ctx, asg));
      break;
    case Formula::Max:
      v = imax(ev_node(t, p->f1, ctx, asg), ev_node(t, p->f2, ctx, asg));
      break;
    case Formula::Sup:
    case Formula::Inf: {
      if (p->vsort.kind != Sort::Marked)
        throw InternalError(
            "translated formulas quantify over the marked sort only");
      bool want_max = p->kind == Formula::Sup;
      std::optional<int> saved;
      if (auto prev = asg.find(p->var); prev != asg.end())
        saved = prev->second;
      bool first = true;
      for (int k = 0; k < ctx.n; ++k) {
        asg[p->var] = k;
        Interval r = ev_node(t, p->f1, ctx, asg);
        v = first ? r : (want_max ? imax(v, r) : imin(v, r));
        first = false;
      }
      if (saved)
        asg[p->var] = *saved;
      else
        asg.erase(p->var);
      if (first) throw InternalError("marked sort has no labels");
      break;
    }
    default:
      throw InternalError("translated formula contains an unexpected connective");
  }
  return imeet(v, p->range);
}

// Conditions under which the scheme's value dichotomy is actually present
// on the model, mirroring the build-time margin chain. Empty string means
// the gap is usable at this tolerance.
std::string degeneracy_reason(const AtomCtx& ctx, const Rat& tol) {
  if (!(ctx.gap.lo > 0)) return "gap value is not certifiably positive";
  if (ctx.gap.hi > 1) return "gap value exceeds the equality-atom band";
  if (2 * tol >= ctx.gap.lo) return "tolerance is not below half the gap";
  if (ctx.scheme == Scheme::Constants) {
    if (ctx.has_cross) {
      Rat sep_lo = field_real_enclosure(ctx.min_sep).lo;
      if (!(ctx.gap.hi <= sep_lo))
        return "gap is not below the smallest cross-class separation";
    }
    return "";
  }
  if (!(ctx.delta1_sq > 0))
    return "axis operators do not move the orthogonal complement";
  Rat g3_hi = rat_sqrt(ctx.g3_sq, 64).hi;
  Rat g5_hi = rat_sqrt(ctx.g5_sq, 64).hi;
  Rat y_hi = rat_sqrt(ctx.g3_sq / ctx.delta1_sq, 64).hi;
  if (!(2 * ctx.g3_sq <= ctx.delta1_sq * ctx.g4_sq))
    return "phase margins failed: equivalent pairs can cross the g4 band";
  if (!(ctx.g5_sq >= g3_hi))
    return "phase margins failed: g5 below the gap value";
  if (ctx.has_cross) {
    Rat sep_lo = field_real_enclosure(ctx.min_sep).lo;
    Rat root_lo = field_real_sqrt(ctx.min_sep, 64).lo;
    Rat lead = Rat(1) - g3_hi - y_hi;
    if (!(lead * root_lo - rat_frac(3, 2) * y_hi >= g5_hi))
      return "separation margins failed: cross-class pairs can dodge g5";
    if (!(sep_lo - ctx.g4_sq > g3_hi))
      return "separation margins failed: g4 not below the class separation";
  }
  return "";
}

}  // namespace

int sentence_var_count(const FOSentence& s) {
  int total = static_cast<int>(s.prefix_exists.size());
  for (const auto& conj : s.matrix)
    for (const auto& a : conj) total = std::max({total, a.lhs, a.rhs});
  return total;
}

FOSentence sentence_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("sentence JSON must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "name" && it.key() != "prefix" && it.key() != "matrix")
      throw InputError("unknown sentence key: " + it.key());
  FOSentence s;
  if (j.contains("name")) {
    if (!j["name"].is_string())
      throw InputError("sentence name must be a string");
    s.name = j["name"].get<std::string>();
  }
  if (!j.contains("prefix") || !j["prefix"].is_array())
    throw InputError("sentence needs a \"prefix\" array");
  for (const auto& q : j["prefix"]) {
    if (q == "forall")
      s.prefix_exists.push_back(false);
    else if (q == "exists")
      s.prefix_exists.push_back(true);
    else
      throw InputError("prefix entries must be \"forall\" or \"exists\"");
  }
  if (!j.contains("matrix") || !j["matrix"].is_array())
    throw InputError(
        "sentence matrix must be in disjunctive normal form: an array of "
        "conjunctions");
  for (const auto& cj : j["matrix"]) {
    if (!cj.is_array())
      throw InputError(
          "sentence matrix must be in disjunctive normal form: each "
          "disjunct is an array of atoms");
    std::vector<FOAtom> conj;
    for (const auto& aj : cj) {
      if (!aj.is_object())
        throw InputError(
            "sentence matrix must be in disjunctive normal form: atoms are "
            "objects, nested formulas are not accepted");
      for (auto it = aj.begin(); it != aj.end(); ++it)
        if (it.key() != "pred" && it.key() != "args" && it.key() != "neg")
          throw InputError("unknown atom key: " + it.key());
      FOAtom a;
      if (!aj.contains("pred") || !aj["pred"].is_string())
        throw InputError("atom needs a \"pred\" string");
      std::string p = aj["pred"].get<std::string>();
      if (p == "E1")
        a.pred = FOAtom::E1;
      else if (p == "E2")
        a.pred = FOAtom::E2;
      else if (p == "eq")
        a.pred = FOAtom::Eq;
      else
        throw InputError("atom predicate must be E1, E2, or eq");
      if (!aj.contains("args") || !aj["args"].is_array() ||
          aj["args"].size() != 2 || !aj["args"][0].is_number_integer() ||
          !aj["args"][1].is_number_integer())
        throw InputError("atom needs an \"args\" pair of variable indices");
      a.lhs = aj["args"][0].get<int>();
      a.rhs = aj["args"][1].get<int>();
      if (aj.contains("neg")) {
        if (!aj["neg"].is_boolean())
          throw InputError("atom \"neg\" must be a boolean");
        a.negated = aj["neg"].get<bool>();
      }
      conj.push_back(a);
    }
    s.matrix.push_back(std::move(conj));
  }
  validate_sentence(s);
  return s;
}

nlohmann::json sentence_to_json(const FOSentence& s) {
  nlohmann::json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["prefix"] = nlohmann::json::array();
  for (bool e : s.prefix_exists) j["prefix"].push_back(e ? "exists" : "forall");
  j["matrix"] = nlohmann::json::array();
  for (const auto& conj : s.matrix) {
    nlohmann::json cj = nlohmann::json::array();
    for (const auto& a : conj) {
      nlohmann::json aj;
      aj["pred"] = pred_name(a.pred);
      aj["args"] = {a.lhs, a.rhs};
      if (a.negated) aj["neg"] = true;
      cj.push_back(aj);
    }
    j["matrix"].push_back(cj);
  }
  return j;
}

FOSentence load_sentence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sentence file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("sentence file is not valid JSON: " +
                     std::string(e.what()));
  }
  return sentence_from_json(j);
}

std::string sentence_to_text(const FOSentence& s) {
  std::string out;
  for (size_t i = 0; i < s.prefix_exists.size(); ++i) {
    out += s.prefix_exists[i] ? "exists y" : "forall y";
    out += std::to_string(i + 1);
    out += " ";
  }
  if (!s.prefix_exists.empty()) out += ". ";
  for (size_t c = 0; c < s.matrix.size(); ++c) {
    if (c) out += " | ";
    out += "(";
    for (size_t k = 0; k < s.matrix[c].size(); ++k) {
      if (k) out += " & ";
      const FOAtom& a = s.matrix[c][k];
      if (a.negated) out += "!";
      out += pred_name(a.pred);
      out += "(y" + std::to_string(a.lhs) + ",y" + std::to_string(a.rhs) + ")";
    }
    out += ")";
  }
  return out;
}

const std::vector<FOSentence>& sentence_battery() {
  static const std::vector<FOSentence> items = [] {
    const bool A = false, E = true;
    auto at = [](FOAtom::Pred p, int l, int r, bool neg = false) {
      FOAtom a;
      a.pred = p;
      a.negated = neg;
      a.lhs = l;
      a.rhs = r;
      return a;
    };
    auto mk = [](std::string name, std::vector<bool> prefix,
                 std::vector<std::vector<FOAtom>> matrix) {
      FOSentence s;
      s.name = std::move(name);
      s.prefix_exists = std::move(prefix);
      s.matrix = std::move(matrix);
      return s;
    };
    using P = FOAtom;
    std::vector<FOSentence> v;
    v.push_back(mk("refl-e1", {A}, {{at(P::E1, 1, 1)}}));
    v.push_back(mk("refl-e2", {A}, {{at(P::E2, 1, 1)}}));
    v.push_back(mk("refl-both", {A}, {{at(P::E1, 1, 1), at(P::E2, 1, 1)}}));
    v.push_back(mk("some-refl", {E}, {{at(P::E1, 1, 1), at(P::E2, 1, 1)}}));
    v.push_back(mk("tauto-e1", {A, A},
                   {{at(P::E1, 1, 2)}, {at(P::E1, 1, 2, true)}}));
    v.push_back(mk("sym-e1", {A, A},
                   {{at(P::E1, 1, 2, true)}, {at(P::E1, 2, 1)}}));
    v.push_back(mk("total-e1", {A, A}, {{at(P::E1, 1, 2)}}));
    v.push_back(mk("total-e2", {A, A}, {{at(P::E2, 1, 2)}}));
    v.push_back(mk("split-e1", {E, E}, {{at(P::E1, 1, 2, true)}}));
    v.push_back(mk("finer-e1", {E, E},
                   {{at(P::E1, 1, 2), at(P::E2, 1, 2, true)}}));
    v.push_back(mk("finer-e2", {E, E},
                   {{at(P::E2, 1, 2), at(P::E1, 1, 2, true)}}));
    v.push_back(mk("buddy-e1", {A, E},
                   {{at(P::E1, 1, 2), at(P::Eq, 1, 2, true)}}));
    v.push_back(mk("hub-e1", {E, A}, {{at(P::E1, 1, 2)}}));
    v.push_back(mk("cover-pair", {A, A},
                   {{at(P::Eq, 1, 2)}, {at(P::E1, 1, 2)}, {at(P::E2, 1, 2)}}));
    v.push_back(mk("isolated-e1", {E, A},
                   {{at(P::Eq, 1, 2)}, {at(P::E1, 1, 2, true)}}));
    v.push_back(mk("common-pair", {E, E},
                   {{at(P::Eq, 1, 2, true), at(P::E1, 1, 2),
                     at(P::E2, 1, 2)}}));
    v.push_back(mk("free-eq", {}, {{at(P::Eq, 1, 1)}}));
    return v;
  }();
  return items;
}

bool fo_check(const EqStructure& s, const FOSentence& rho) {
  validate_sentence(rho);
  int total = sentence_var_count(rho);
  int bound = static_cast<int>(rho.prefix_exists.size());
  std::vector<std::pair<int, bool>> quants;
  // free variables are universally closed outside the written prefix
  for (int k = bound + 1; k <= total; ++k) quants.emplace_back(k, false);
  for (int k = 1; k <= bound; ++k)
    quants.emplace_back(k, rho.prefix_exists[k - 1]);
  std::vector<int> asg(total + 1, 1);
  return fo_rec(s, rho, quants, 0, asg);
}

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::Constants ? "constants" : "dynamical";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "constants") return Scheme::Constants;
  if (name == "dynamical") return Scheme::Dynamical;
  throw InputError("unknown scheme: " + name +
                   " (expected constants or dynamical)");
}

Translation translate_fo(const FOSentence& rho, Scheme scheme) {
  validate_sentence(rho);
  Translation t;
  t.scheme = scheme;
  t.gap_formula = gap_formula_for(scheme);
  Builder b = make_builder(t);
  FormulaPtr body;
  for (const auto& conj : rho.matrix) {
    FormulaPtr c;
    for (const auto& a : conj) {
      FormulaPtr lit = literal_formula(b, a);
      c = c ? mk_max(std::move(c), std::move(lit)) : std::move(lit);
    }
    body = body ? mk_min(std::move(body), std::move(c)) : std::move(c);
  }
  for (int k = static_cast<int>(rho.prefix_exists.size()); k >= 1; --k)
    body = rho.prefix_exists[k - 1]
               ? mk_inf(var_name(k), Sort::marked(), std::move(body))
               : mk_sup(var_name(k), Sort::marked(), std::move(body));
  int total = sentence_var_count(rho);
  for (int k = static_cast<int>(rho.prefix_exists.size()) + 1; k <= total; ++k)
    body = mk_sup(var_name(k), Sort::marked(), std::move(body));
  t.formula = mk_min(t.gap_formula, std::move(body));
  return t;
}

Translation scheme_axiom(Scheme scheme, int axis, int which) {
  if (axis != 1 && axis != 2) throw InputError("axiom axis must be 1 or 2");
  if (which != 0 && which != 1)
    throw InputError("axiom selector must be 0 or 1");
  Translation t;
  t.scheme = scheme;
  t.gap_formula = gap_formula_for(scheme);
  Builder b = make_builder(t);
  FOAtom::Pred p = axis == 1 ? FOAtom::E1 : FOAtom::E2;
  FOAtom pos, negd;
  pos.pred = negd.pred = p;
  pos.lhs = negd.lhs = 1;
  pos.rhs = negd.rhs = 2;
  negd.negated = true;
  FormulaPtr psi = literal_formula(b, pos);
  FormulaPtr psic = literal_formula(b, negd);
  // caps chosen above the static ranges so the sum is never clipped
  Rat cap = scheme == Scheme::Constants ? Rat(5) : Rat(8);
  FormulaPtr body =
      which == 0
          ? mk_min(std::move(psi), std::move(psic))
          : mk_truncsub(t.gap_formula,
                        mk_truncadd(cap, std::move(psi), std::move(psic)));
  body = mk_sup("y2", Sort::marked(), std::move(body));
  t.formula = mk_sup("y1", Sort::marked(), std::move(body));
  return t;
}

EvalResult interp_eval(const Translation& t, const Model& m,
                       const EqStructure& s, const Rat& eps, long budget) {
  if (!t.formula) throw InputError("translation carries no formula");
  if (eps <= 0) throw InputError("evaluation tolerance must be positive");
  AtomCtx ctx = build_ctx(m, s, t.scheme);
  ctx.atom_eps = eps / 4;
  ctx.budget = budget;
  std::map<std::string, int> asg;
  EvalResult r;
  r.value = ev_node(t, t.formula, ctx, asg);
  r.mode = "reduction";
  r.cost = ctx.cost;
  return r;
}

ReductionReport verify_reduction(const EqStructure& s, const FOSentence& rho,
                                 Scheme scheme, const Rat& tol) {
  Model m = scheme == Scheme::Constants ? build_marked_constants(s).first
                                        : build_dynamical_interpretation(s);
  return verify_reduction_on(m, s, rho, scheme, tol);
}

ReductionReport verify_reduction_on(const Model& m, const EqStructure& s,
                                    const FOSentence& rho, Scheme scheme,
                                    const Rat& tol_in) {
  validate_sentence(rho);
  AtomCtx probe = build_ctx(m, s, scheme);
  ReductionReport rep;
  rep.sentence = rho.name.empty() ? sentence_to_text(rho) : rho.name;
  rep.scheme = scheme_name(scheme);
  rep.gap = probe.gap;
  rep.tol = tol_in > 0 ? tol_in : Rat(probe.gap.lo / 4);
  std::string why = degeneracy_reason(probe, rep.tol);
  if (!why.empty()) {
    rep.gap_degenerate = true;
    rep.note = why;
    return rep;
  }
  Translation t = translate_fo(rho, scheme);
  EvalResult res = interp_eval(t, m, s, Rat(rep.tol / 2));
  rep.value = res.value;
  rep.cost = res.cost;
  rep.fo_truth = fo_check(s, rho);
  rep.continuous_zero = res.value.hi <= rep.tol;
  rep.agrees = rep.continuous_zero == rep.fo_truth;
  rep.dichotomy_ok =
      res.value.hi <= rep.tol || res.value.lo >= probe.gap.lo - rep.tol;
  if (!rep.agrees)
    rep.note = "continuous value disagrees with the discrete oracle";
  return rep;
}

}  // namespace hsw
