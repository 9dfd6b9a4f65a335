#include "hsw/eval.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hsw/errors.hpp"
#include "hsw/linalg.hpp"

namespace hsw {

using nlohmann::json;

namespace {

long bits_for_eps(const Rat& eps) {
  long b = 48;
  Rat target = eps / 16;
  while (b < 384 && rat_pow2(-b) > target) b += 32;
  return b;
}

Interval min0(const Interval& v) {
  return Interval(rat_min(v.lo, Rat(0)), rat_min(v.hi, Rat(0)));
}

FVec basis_vec(int dim, int k) {
  FVec v(dim);
  v[k] = FieldScalar::one();
  return v;
}

IVec exact_to_box(const FVec& v) {
  IVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = field_to_icomplex(v[i]);
  return out;
}

bool fvec_all_zero(const FVec& v) {
  for (const auto& z : v)
    if (!z.is_zero()) return false;
  return true;
}

bool fmat_all_zero(const FMat& m) {
  for (const auto& row : m)
    if (!fvec_all_zero(row)) return false;
  return true;
}

// Enclosures of the inf and sup of the image of |.| applied to a value set
// [m, M], given enclosures of m and M. Both maps are monotone in (m, M), so
// corner evaluation is exact interval extension.
std::pair<Interval, Interval> abs_image_pair(const Interval& m_enc,
                                             const Interval& M_enc) {
  Interval sup = imax(m_enc.abs(), M_enc.abs());
  auto inf_at = [](const Rat& m, const Rat& M) -> Rat {
    if (m > 0) return m;
    if (M < 0) return -M;
    return Rat(0);
  };
  Interval inf(inf_at(m_enc.lo, M_enc.hi), inf_at(m_enc.hi, M_enc.lo));
  return {inf, sup};
}

// ---------------------------------------------------------------------------
// Environments

struct Binding {
  enum Kind { Exact, Box, Label } kind = Exact;
  FVec vec;
  IVec box;
  int label = -1;

  static Binding exact(FVec v) {
    Binding b;
    b.kind = Exact;
    b.vec = std::move(v);
    return b;
  }
  static Binding boxed(IVec v) {
    Binding b;
    b.kind = Box;
    b.box = std::move(v);
    return b;
  }
  static Binding labeled(int k) {
    Binding b;
    b.kind = Label;
    b.label = k;
    return b;
  }
};

using Env = std::map<std::string, Binding>;

// ---------------------------------------------------------------------------
// Quantifier blocks and coordinate layouts

struct BlockVar {
  std::string name;
  int radius;
};

struct Block {
  Formula::Kind kind;
  std::vector<BlockVar> vars;
  FormulaPtr body;
};

Block collect_block(const FormulaPtr& f) {
  Block b{f->kind, {}, nullptr};
  FormulaPtr cur = f;
  std::set<std::string> seen;
  while (cur->is_quantifier() && cur->kind == b.kind &&
         cur->vsort.is_ball() && !seen.count(cur->var)) {
    b.vars.push_back({cur->var, cur->vsort.radius});
    seen.insert(cur->var);
    cur = cur->f1;
  }
  b.body = cur;
  return b;
}

// Real coordinates parameterizing a tuple of ball vectors. The sliced layout
// exploits unitary invariance of formulas that mention no operators,
// constants, or marked labels: the j-th block vector can be rotated into
// span(e_1..e_{j+1}) with a nonnegative real leading coefficient, shrinking
// the search dimension without changing the quantified value.
struct LCoord {
  int var;
  int cx;
  bool im;
  bool nonneg;
};

struct Layout {
  std::vector<BlockVar> vars;
  std::vector<LCoord> coords;
  int dim = 0;
  bool sliced = false;
};

Layout make_layout(const std::vector<BlockVar>& vars, int dim, bool sliced) {
  Layout L;
  L.vars = vars;
  L.dim = dim;
  L.sliced = sliced;
  for (int j = 0; j < static_cast<int>(vars.size()); ++j) {
    if (sliced && j < dim) {
      for (int c = 0; c < j; ++c) {
        L.coords.push_back({j, c, false, false});
        L.coords.push_back({j, c, true, false});
      }
      L.coords.push_back({j, j, false, true});
    } else {
      for (int c = 0; c < dim; ++c) {
        L.coords.push_back({j, c, false, false});
        L.coords.push_back({j, c, true, false});
      }
    }
  }
  return L;
}

std::vector<FVec> vecs_from_coords(const Layout& L, const std::vector<Rat>& x) {
  std::vector<FVec> out(L.vars.size(), FVec(L.dim));
  for (size_t i = 0; i < L.coords.size(); ++i) {
    const LCoord& c = L.coords[i];
    FieldScalar& z = out[c.var][c.cx];
    if (c.im)
      z = z + FieldScalar(Rat(0), x[i], Rat(0), Rat(0));
    else
      z = z + FieldScalar(x[i], Rat(0), Rat(0), Rat(0));
  }
  return out;
}

std::vector<IVec> boxes_from_coords(const Layout& L,
                                    const std::vector<Interval>& x) {
  std::vector<IVec> out(L.vars.size(), IVec(L.dim));
  for (size_t i = 0; i < L.coords.size(); ++i) {
    const LCoord& c = L.coords[i];
    IComplex& z = out[c.var][c.cx];
    if (c.im)
      z.im = z.im + x[i];
    else
      z.re = z.re + x[i];
  }
  return out;
}

// Scales a vector into the radius-r ball when needed; the shrink factor
// stays slightly inside so the exact membership check passes.
FVec project_ball(FVec v, int r) {
  FieldReal n2 = fvec_norm2(v);
  FieldReal r2(Rat(r) * r, Rat(0));
  if (n2 <= r2) return v;
  Rat up = field_real_sqrt_hi(n2, 48);
  Rat s = Rat(r) * rat_frac(255, 256) / up;
  while (FieldReal(s * s, Rat(0)) * n2 > r2) s *= rat_frac(255, 256);
  FieldScalar sc = FieldScalar::from_rat(s);
  for (auto& z : v) z = sc * z;
  return v;
}

// True when no point of the coordinate box lies in all the per-variable
// balls, so the box can be discarded without losing coverage.
bool box_infeasible(const Layout& L, const std::vector<Interval>& c) {
  std::vector<Rat> acc(L.vars.size(), Rat(0));
  for (size_t i = 0; i < L.coords.size(); ++i) {
    const Interval& v = c[i];
    Rat m = v.contains(Rat(0)) ? Rat(0) : rat_min(rat_abs(v.lo), rat_abs(v.hi));
    acc[L.coords[i].var] += m * m;
  }
  for (size_t j = 0; j < L.vars.size(); ++j) {
    Rat r2 = Rat(L.vars[j].radius) * L.vars[j].radius;
    if (acc[j] > r2) return true;
  }
  return false;
}

json witness_json(const Layout& L, const std::vector<FVec>& vs) {
  json w = json::object();
  for (size_t j = 0; j < L.vars.size(); ++j) {
    json coords = json::array();
    for (const auto& z : vs[j]) coords.push_back(z.encode());
    w[L.vars[j].name] = coords;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Structural extraction: affine terms and Hermitian quadratic forms

struct AffineTerm {
  bool has_a = false;
  FMat a;  // valid when has_a
  FVec b;
};

// f(x) = x* H x + Re(l* x) + c over the quantified variable. H and l are
// exact; the constant part is an enclosure so x-free subformulas can fold in.
// psd records positive semidefiniteness known by construction, which enables
// the exact trace bound lambda_max(H) <= tr(H).
struct QuadFunc {
  FMat h;  // empty means zero
  FVec l;  // empty means zero
  Interval c;
  bool psd = false;
};

struct StructImage {
  Interval inf_enc, sup_enc;
  bool inf_tight = false, sup_tight = false;
};

bool qf_h_zero(const QuadFunc& q) { return q.h.empty() || fmat_all_zero(q.h); }
bool qf_l_zero(const QuadFunc& q) { return q.l.empty() || fvec_all_zero(q.l); }

QuadFunc qf_const(const Interval& c) {
  QuadFunc q;
  q.c = c;
  q.psd = true;
  return q;
}

QuadFunc qf_scale(const Rat& s, const QuadFunc& a) {
  QuadFunc q;
  FieldScalar fs = FieldScalar::from_rat(s);
  if (!a.h.empty()) q.h = fmat_scale(fs, a.h);
  if (!a.l.empty()) q.l = fvec_scale(fs, a.l);
  q.c = iscale(s, a.c);
  q.psd = a.psd && s >= 0;
  return q;
}

QuadFunc qf_neg_plus(const Rat& cap, const QuadFunc& a) {
  QuadFunc q = qf_scale(Rat(-1), a);
  q.c = Interval::point(cap) + q.c;
  q.psd = qf_h_zero(q);
  return q;
}

QuadFunc qf_add(const QuadFunc& a, const QuadFunc& b) {
  QuadFunc q;
  if (a.h.empty())
    q.h = b.h;
  else if (b.h.empty())
    q.h = a.h;
  else
    q.h = fmat_add(a.h, b.h);
  if (a.l.empty())
    q.l = b.l;
  else if (b.l.empty())
    q.l = a.l;
  else
    q.l = fvec_add(a.l, b.l);
  q.c = a.c + b.c;
  q.psd = a.psd && b.psd;
  return q;
}

QuadFunc qf_sub(const QuadFunc& a, const QuadFunc& b) {
  return qf_add(a, qf_scale(Rat(-1), b));
}

// Sound upper bound for the quad over the radius-r ball. The linear cross
// term is handled with AM-GM so every comparison stays exact in Q(sqrt2).
FieldReal qf_cheap_sup(const QuadFunc& q, int r) {
  Rat r2 = Rat(r) * r;
  FieldReal bound(q.c.hi, Rat(0));
  if (!qf_h_zero(q)) {
    FieldReal lam(Rat(0), Rat(0));
    if (q.psd) {
      for (size_t i = 0; i < q.h.size(); ++i) lam = lam + q.h[i][i].real();
    } else {
      // Gershgorin row bound with exact per-entry modulus upper bounds
      bool first = true;
      for (size_t i = 0; i < q.h.size(); ++i) {
        FieldReal row = q.h[i][i].real();
        for (size_t j = 0; j < q.h.size(); ++j) {
          if (i == j) continue;
          Rat m = field_real_sqrt_hi(q.h[i][j].abs2(), 32);
          row = row + FieldReal(m, Rat(0));
        }
        if (first || row > lam) lam = row;
        first = false;
      }
    }
    if (lam.sign() > 0) bound = bound + FieldReal(r2, Rat(0)) * lam;
  }
  if (!qf_l_zero(q)) {
    // r * ||l|| <= (r^2 + ||l||^2) / 2
    FieldReal n2 = fvec_norm2(q.l);
    bound = bound + FieldReal(r2 / 2, Rat(0)) + n2 * FieldReal(rat_frac(1, 2), Rat(0));
  }
  return bound;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluator

namespace {

class Evaluator {
 public:
  Evaluator(const Model& m, long budget, bool heuristic)
      : model_(m), budget_(budget), heuristic_(heuristic) {}

  Interval run(const FormulaPtr& f, const Rat& eps) {
    Env env;
    return enclose(f, env, eps, 0);
  }

  long used() const { return used_; }
  const json& root_witness() const { return root_witness_; }
  bool have_partial() const { return have_partial_; }
  const Interval& partial() const { return best_partial_; }

 private:
  const Model& model_;
  long budget_;
  long used_ = 0;
  bool heuristic_;
  bool exhausted_ = false;
  std::mt19937_64 rng_{0x9E3779B97F4A7C15ull};
  std::map<std::string, FMat> adj_cache_;
  json root_witness_ = json::object();
  Interval best_partial_{Rat(0), Rat(0)};
  bool have_partial_ = false;

  void charge(long n) {
    used_ += n;
    if (used_ > budget_ && !exhausted_) {
      if (heuristic_)
        exhausted_ = true;
      else
        throw BudgetError("evaluation budget of " + std::to_string(budget_) +
                          " node evaluations exhausted");
    }
  }

  const FMat& op_of(const std::string& name) {
    return model_operator(model_, name);
  }

  const FMat& adj_of(const std::string& name) {
    auto it = adj_cache_.find(name);
    if (it == adj_cache_.end())
      it = adj_cache_.emplace(name, fmat_adjoint(model_operator(model_, name)))
               .first;
    return it->second;
  }

  const Binding& binding_of(const std::string& name, const Env& env) {
    auto it = env.find(name);
    if (it == env.end())
      throw InternalError("unbound variable '" + name + "' during evaluation");
    return it->second;
  }

  // ---- term evaluation ----

  std::optional<FVec> term_exact(const TermPtr& t, const Env& env) {
    charge(1);
    switch (t->kind) {
      case Term::Var: {
        const Binding& b = binding_of(t->name, env);
        if (b.kind == Binding::Exact) return b.vec;
        if (b.kind == Binding::Box) return std::nullopt;
        throw InternalError("marked variable '" + t->name +
                            "' used as a vector term");
      }
      case Term::Zero:
        return FVec(model_.dim);
      case Term::Const:
        return model_.constants.at(t->name);
      case Term::Qu: {
        const Binding& b = binding_of(t->lhs->name, env);
        if (b.kind != Binding::Label)
          throw InternalError("qu argument is not a marked label");
        return basis_vec(model_.dim, b.label);
      }
      case Term::Add: {
        auto a = term_exact(t->lhs, env), b = term_exact(t->rhs, env);
        if (!a || !b) return std::nullopt;
        return fvec_add(*a, *b);
      }
      case Term::Sub: {
        auto a = term_exact(t->lhs, env), b = term_exact(t->rhs, env);
        if (!a || !b) return std::nullopt;
        return fvec_sub(*a, *b);
      }
      case Term::Scale: {
        auto a = term_exact(t->lhs, env);
        if (!a) return std::nullopt;
        return fvec_scale(FieldScalar::from_gaussian(t->sc_re, t->sc_im), *a);
      }
      case Term::Apply: {
        auto a = term_exact(t->lhs, env);
        if (!a) return std::nullopt;
        return fmat_apply(op_of(t->name), *a);
      }
      case Term::ApplyInv: {
        auto a = term_exact(t->lhs, env);
        if (!a) return std::nullopt;
        return fmat_apply(adj_of(t->name), *a);
      }
    }
    throw InternalError("unhandled term kind");
  }

  IVec term_box(const TermPtr& t, const Env& env) {
    charge(1);
    switch (t->kind) {
      case Term::Var: {
        const Binding& b = binding_of(t->name, env);
        if (b.kind == Binding::Exact) return exact_to_box(b.vec);
        if (b.kind == Binding::Box) return b.box;
        throw InternalError("marked variable '" + t->name +
                            "' used as a vector term");
      }
      case Term::Zero:
        return IVec(model_.dim);
      case Term::Const:
        return exact_to_box(model_.constants.at(t->name));
      case Term::Qu: {
        const Binding& b = binding_of(t->lhs->name, env);
        return exact_to_box(basis_vec(model_.dim, b.label));
      }
      case Term::Add:
        return ivec_add(term_box(t->lhs, env), term_box(t->rhs, env));
      case Term::Sub:
        return ivec_sub(term_box(t->lhs, env), term_box(t->rhs, env));
      case Term::Scale: {
        IComplex c(Interval::point(t->sc_re), Interval::point(t->sc_im));
        return ivec_scale(c, term_box(t->lhs, env));
      }
      case Term::Apply:
        return fmat_apply_ivec(op_of(t->name), term_box(t->lhs, env));
      case Term::ApplyInv:
        return fmat_apply_ivec(adj_of(t->name), term_box(t->lhs, env));
    }
    throw InternalError("unhandled term kind");
  }

  int label_of(const TermPtr& t, const Env& env) {
    if (t->kind != Term::Var)
      throw InternalError("marked term is not a variable");
    const Binding& b = binding_of(t->name, env);
    if (b.kind != Binding::Label)
      throw InternalError("marked variable without label binding");
    return b.label;
  }

  // ---- atoms ----

  Interval atom_enclose(const FormulaPtr& f, const Env& env, const Rat& eps) {
    if (f->kind == Formula::D && f->t1->sort.kind == Sort::Marked) {
      int a = label_of(f->t1, env), b = label_of(f->t2, env);
      return Interval::point(Rat(a == b ? 0 : 1));
    }
    long bits = bits_for_eps(eps);
    auto e1 = term_exact(f->t1, env);
    auto e2 = term_exact(f->t2, env);
    if (e1 && e2) {
      if (f->kind == Formula::D) {
        FieldReal n2 = fvec_norm2(fvec_sub(*e1, *e2));
        return field_real_sqrt(n2, bits);
      }
      FieldScalar ip = fvec_inner(*e1, *e2);
      return field_real_enclosure(f->kind == Formula::ReIP ? ip.real()
                                                           : ip.imag());
    }
    IVec b1 = e1 ? exact_to_box(*e1) : term_box(f->t1, env);
    IVec b2 = e2 ? exact_to_box(*e2) : term_box(f->t2, env);
    if (f->kind == Formula::D) {
      Interval n2 = ivec_norm2(ivec_sub(b1, b2));
      return isqrt_enclosure(n2, rat_min(eps / 8, rat_pow2(-16)));
    }
    IComplex ip = ivec_inner(b1, b2);
    return f->kind == Formula::ReIP ? ip.re : ip.im;
  }

  // ---- core recursion ----

  bool env_has_box(const FormulaPtr& f, const Env& env) {
    for (const auto& [name, w] : f->lip) {
      (void)w;
      auto it = env.find(name);
      if (it != env.end() && it->second.kind == Binding::Box) return true;
    }
    return false;
  }

 public:
  Interval enclose(const FormulaPtr& f, const Env& env, const Rat& eps,
                   int depth) {
    charge(1);
    Interval v;
    switch (f->kind) {
      case Formula::RatConst:
        v = Interval::point(f->q);
        break;
      case Formula::D:
      case Formula::ReIP:
      case Formula::ImIP:
        v = atom_enclose(f, env, eps);
        break;
      case Formula::Half:
        v = iscale(rat_frac(1, 2), enclose(f->f1, env, eps, depth));
        break;
      case Formula::TruncSub:
        v = (enclose(f->f1, env, eps / 2, depth) -
             enclose(f->f2, env, eps / 2, depth))
                .clamp_nonneg();
        break;
      case Formula::Min:
        v = imin(enclose(f->f1, env, eps / 2, depth),
                 enclose(f->f2, env, eps / 2, depth));
        break;
      case Formula::Max:
        v = imax(enclose(f->f1, env, eps / 2, depth),
                 enclose(f->f2, env, eps / 2, depth));
        break;
      case Formula::AbsDiff:
        v = (enclose(f->f1, env, eps / 2, depth) -
             enclose(f->f2, env, eps / 2, depth))
                .abs();
        break;
      case Formula::Neg:
        v = Interval::point(f->q) - enclose(f->f1, env, eps, depth);
        break;
      case Formula::TruncAdd:
        v = imin(enclose(f->f1, env, eps / 2, depth) +
                     enclose(f->f2, env, eps / 2, depth),
                 Interval::point(f->q));
        break;
      case Formula::Prod: {
        Rat ea = eps / (2 * (f->f2->range.hi + 1));
        Rat eb = eps / (2 * (f->f1->range.hi + 1));
        v = enclose(f->f1, env, ea, depth) * enclose(f->f2, env, eb, depth);
        break;
      }
      case Formula::Sup:
      case Formula::Inf: {
        // heuristic search only drives outermost quantifiers; anything it
        // nests over runs through the certified paths so sample values stay
        // sound on both sides
        if (f->vsort.kind == Sort::Marked)
          v = quant_marked(f, env, eps, depth);
        else if (heuristic_ && depth == 0)
          v = quant_heuristic(f, env, depth);
        else if (env_has_box(f, env))
          v = quant_cheap(f, env, eps, depth);
        else
          v = quant_certified(f, env, eps, depth);
        break;
      }
    }
    return imeet(v, f->range);
  }

 private:
  // ---- marked quantifiers: exact enumeration over labels ----

  Interval quant_marked(const FormulaPtr& f, const Env& env, const Rat& eps,
                        int depth) {
    bool is_sup = f->kind == Formula::Sup;
    Interval acc;
    bool first = true;
    int best = 0;
    for (int k = 0; k < model_.dim; ++k) {
      Env e2 = env;
      e2[f->var] = Binding::labeled(k);
      Interval child = enclose(f->f1, e2, eps, depth + 1);
      if (first) {
        acc = child;
      } else if (is_sup) {
        if (child.lo > acc.lo) best = k;
        acc = imax(acc, child);
      } else {
        if (child.hi < acc.hi) best = k;
        acc = imin(acc, child);
      }
      first = false;
    }
    if (depth == 0)
      root_witness_[f->var] = model_.marked.at(static_cast<size_t>(best));
    return acc;
  }

  // ---- anchors and orthogonal witnesses ----

  // Exact vectors standing in for the environment's ball bindings: exact
  // vectors themselves, box centers for interval bindings.
  std::vector<FVec> collect_anchors(const FormulaPtr& body, const Env& env,
                                    const std::string& skip) {
    std::vector<FVec> anchors;
    for (const auto& [name, w] : body->lip) {
      (void)w;
      if (name == skip) continue;
      auto it = env.find(name);
      if (it == env.end()) continue;
      if (it->second.kind == Binding::Exact) {
        anchors.push_back(it->second.vec);
      } else if (it->second.kind == Binding::Box) {
        FVec c(model_.dim);
        for (int i = 0; i < model_.dim; ++i)
          c[i] = FieldScalar::from_gaussian(it->second.box[i].re.mid(),
                                            it->second.box[i].im.mid());
        anchors.push_back(std::move(c));
      }
    }
    return anchors;
  }

  // Unit-or-smaller vector exactly orthogonal to every anchor, found by
  // exact Gram-Schmidt against the anchors' span; nullopt when they span.
  std::optional<FVec> ortho_witness(const std::vector<FVec>& anchors) {
    int dim = model_.dim;
    std::vector<FVec> basis;  // orthogonal, not normalized
    std::vector<FieldScalar> inv_n2;
    for (const auto& a : anchors) {
      FVec r = a;
      for (size_t i = 0; i < basis.size(); ++i) {
        FieldScalar coeff = fvec_inner(basis[i], r) * inv_n2[i];
        r = fvec_sub(r, fvec_scale(coeff, basis[i]));
      }
      FieldReal n2 = fvec_norm2(r);
      if (n2.sign() > 0) {
        inv_n2.push_back(FieldScalar::from_real(n2).inverse());
        basis.push_back(std::move(r));
      }
    }
    if (static_cast<int>(basis.size()) >= dim) return std::nullopt;
    FVec best;
    FieldReal best_n2(Rat(0), Rat(0));
    for (int k = 0; k < dim; ++k) {
      FVec r = basis_vec(dim, k);
      for (size_t i = 0; i < basis.size(); ++i) {
        FieldScalar coeff = fvec_inner(basis[i], r) * inv_n2[i];
        r = fvec_sub(r, fvec_scale(coeff, basis[i]));
      }
      FieldReal n2 = fvec_norm2(r);
      if (n2 > best_n2) {
        best_n2 = n2;
        best = std::move(r);
      }
    }
    if (best_n2.sign() <= 0) return std::nullopt;
    Rat up = field_real_sqrt_hi(best_n2, 48);
    Rat s = Rat(1) / up;
    while (FieldReal(s * s, Rat(0)) * best_n2 > FieldReal(Rat(1), Rat(0)))
      s *= rat_frac(255, 256);
    return fvec_scale(FieldScalar::from_rat(s), best);
  }

  // ---- cheap quantifier bounds under interval environments ----
  //
  // With some outer variable boxed, refinement of this quantifier cannot be
  // certified pointwise; instead one wide interval bound plus a handful of
  // exact sample points give a sound (not tight) enclosure. Cost stays
  // additive under nesting, which keeps block refinement above affordable.

  Interval quant_cheap(const FormulaPtr& f, const Env& env, const Rat& eps,
                       int depth) {
    bool is_sup = f->kind == Formula::Sup;
    int r = f->vsort.radius;
    int dim = model_.dim;

    IVec full(dim);
    for (int i = 0; i < dim; ++i)
      full[i] = IComplex(Interval(Rat(-r), Rat(r)), Interval(Rat(-r), Rat(r)));
    Env wide_env = env;
    wide_env[f->var] = Binding::boxed(std::move(full));
    Interval wide = enclose(f->f1, wide_env, eps / 2, depth + 1);

    std::vector<FVec> cands;
    cands.push_back(FVec(dim));
    for (int k = 0; k < dim && k < 8; ++k) cands.push_back(basis_vec(dim, k));
    std::vector<FVec> anchors = collect_anchors(f->f1, env, f->var);
    // anchor projections track the other variables (alignment candidates),
    // the orthogonal witness covers what they miss
    for (const auto& a : anchors) cands.push_back(project_ball(a, r));
    if (auto w = ortho_witness(anchors)) cands.push_back(std::move(*w));
    for (int t = 0; t < 2; ++t) {
      FVec v(dim);
      for (int i = 0; i < dim; ++i) {
        Rat re = rat_frac(static_cast<long>(rng_() % 513) - 256, 256) * r;
        Rat im = rat_frac(static_cast<long>(rng_() % 513) - 256, 256) * r;
        v[i] = FieldScalar::from_gaussian(re, im);
      }
      cands.push_back(project_ball(std::move(v), r));
    }

    bool first = true;
    Rat best(0);
    for (auto& cand : cands) {
      Env e2 = env;
      e2[f->var] = Binding::exact(std::move(cand));
      Interval v = enclose(f->f1, e2, eps / 2, depth + 1);
      Rat val = is_sup ? v.lo : v.hi;
      if (first || (is_sup ? val > best : val < best)) best = val;
      first = false;
    }
    return is_sup ? Interval(best, rat_max(best, wide.hi))
                  : Interval(rat_min(best, wide.lo), best);
  }

  // ---- structural extraction ----

  std::optional<AffineTerm> extract_affine(const TermPtr& t,
                                           const std::string& var,
                                           const Env& env) {
    charge(1);
    int dim = model_.dim;
    switch (t->kind) {
      case Term::Var: {
        if (t->name == var) {
          AffineTerm r;
          r.has_a = true;
          r.a = fmat_identity(dim);
          r.b = FVec(dim);
          return r;
        }
        const Binding& b = binding_of(t->name, env);
        if (b.kind != Binding::Exact) return std::nullopt;
        return AffineTerm{false, {}, b.vec};
      }
      case Term::Zero:
        return AffineTerm{false, {}, FVec(dim)};
      case Term::Const:
        return AffineTerm{false, {}, model_.constants.at(t->name)};
      case Term::Qu: {
        const Binding& b = binding_of(t->lhs->name, env);
        if (b.kind != Binding::Label) return std::nullopt;
        return AffineTerm{false, {}, basis_vec(dim, b.label)};
      }
      case Term::Add:
      case Term::Sub: {
        auto x = extract_affine(t->lhs, var, env);
        auto y = extract_affine(t->rhs, var, env);
        if (!x || !y) return std::nullopt;
        bool sub = t->kind == Term::Sub;
        AffineTerm r;
        r.b = sub ? fvec_sub(x->b, y->b) : fvec_add(x->b, y->b);
        if (x->has_a && y->has_a) {
          r.has_a = true;
          r.a = sub ? fmat_sub(x->a, y->a) : fmat_add(x->a, y->a);
        } else if (x->has_a) {
          r.has_a = true;
          r.a = x->a;
        } else if (y->has_a) {
          r.has_a = true;
          r.a = sub ? fmat_scale(-FieldScalar::one(), y->a) : y->a;
        }
        return r;
      }
      case Term::Scale: {
        auto x = extract_affine(t->lhs, var, env);
        if (!x) return std::nullopt;
        FieldScalar c = FieldScalar::from_gaussian(t->sc_re, t->sc_im);
        AffineTerm r;
        r.b = fvec_scale(c, x->b);
        if (x->has_a) {
          r.has_a = true;
          r.a = fmat_scale(c, x->a);
        }
        return r;
      }
      case Term::Apply:
      case Term::ApplyInv: {
        auto x = extract_affine(t->lhs, var, env);
        if (!x) return std::nullopt;
        const FMat& u =
            t->kind == Term::Apply ? op_of(t->name) : adj_of(t->name);
        AffineTerm r;
        r.b = fmat_apply(u, x->b);
        if (x->has_a) {
          r.has_a = true;
          r.a = fmat_mul(u, x->a);
        }
        return r;
      }
    }
    throw InternalError("unhandled term kind");
  }

  QuadFunc quad_from_ip(const AffineTerm& t1, const AffineTerm& t2,
                        bool imag_part) {
    int dim = model_.dim;
    QuadFunc q;
    FieldScalar i = FieldScalar::i();
    if (t1.has_a && t2.has_a) {
      FMat m = fmat_mul(fmat_adjoint(t1.a), t2.a);
      FMat ms = fmat_adjoint(m);
      if (!imag_part) {
        q.h = fmat_scale(FieldScalar::from_rat(rat_frac(1, 2)),
                         fmat_add(m, ms));
      } else {
        // (M - M*) * (-i/2) is Hermitian
        q.h = fmat_scale(FieldScalar(Rat(0), rat_frac(-1, 2), Rat(0), Rat(0)),
                         fmat_sub(m, ms));
      }
      if (!fmat_is_hermitian(q.h))
        throw InternalError("quadratic extraction produced a non-Hermitian form");
    }
    FVec l(dim);
    bool any_l = false;
    if (t2.has_a) {
      FVec u = fmat_apply(fmat_adjoint(t2.a), t1.b);
      l = imag_part ? fvec_scale(i, u) : u;
      any_l = true;
    }
    if (t1.has_a) {
      FVec u = fmat_apply(fmat_adjoint(t1.a), t2.b);
      if (imag_part) u = fvec_scale(-i, u);
      l = any_l ? fvec_add(l, u) : u;
      any_l = true;
    }
    if (any_l && !fvec_all_zero(l)) q.l = std::move(l);
    FieldScalar ip = fvec_inner(t1.b, t2.b);
    q.c = field_real_enclosure(imag_part ? ip.imag() : ip.real());
    if (!q.h.empty() && fmat_all_zero(q.h)) q.h.clear();
    q.psd = q.h.empty();
    return q;
  }

  // |w* x + s|^2 as an exact rank-one quadratic form.
  QuadFunc quad_from_abs2(const FVec& w, const FieldScalar& s) {
    int dim = model_.dim;
    QuadFunc q;
    q.h = FMat(dim, FVec(dim));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) q.h[i][j] = w[i] * w[j].conj();
    if (fmat_all_zero(q.h)) q.h.clear();
    if (!s.is_zero()) {
      FVec l = fvec_scale(FieldScalar::from_rat(Rat(2)) * s, w);
      if (!fvec_all_zero(l)) q.l = std::move(l);
    }
    q.c = field_real_enclosure(s.abs2());
    q.psd = true;
    return q;
  }

  // The complex affine function x -> <t1(x), t2(x)> when one side is x-free;
  // returns (w, s) with value w* x + s up to conjugation (modulus-preserving).
  std::optional<std::pair<FVec, FieldScalar>> complex_affine_ip(
      const TermPtr& t1, const TermPtr& t2, const std::string& var,
      const Env& env) {
    auto a1 = extract_affine(t1, var, env);
    auto a2 = extract_affine(t2, var, env);
    if (!a1 || !a2) return std::nullopt;
    if (!a1->has_a) {
      if (!a2->has_a) return std::nullopt;  // x-free handled elsewhere
      FVec w = fmat_apply(fmat_adjoint(a2->a), a1->b);
      return std::make_pair(std::move(w), fvec_inner(a1->b, a2->b));
    }
    if (!a2->has_a) {
      FVec w = fmat_apply(fmat_adjoint(a1->a), a2->b);
      return std::make_pair(std::move(w), fvec_inner(a2->b, a1->b));
    }
    return std::nullopt;
  }

  // Recognizes plus[cap](|re ip|^2-like, |im ip|^2-like) built over the same
  // inner product, i.e. the squared-modulus pattern; the product operands may
  // carry the canonical |.| wrapper adiff(., 0).
  static const Formula* strip_abs(const FormulaPtr& g) {
    if (g->kind == Formula::AbsDiff && g->f2->kind == Formula::RatConst &&
        g->f2->q == 0)
      return g->f1.get();
    return g.get();
  }

  std::optional<QuadFunc> match_abs_ip_sq(const FormulaPtr& f,
                                          const std::string& var,
                                          const Env& env, int r) {
    if (f->kind != Formula::TruncAdd) return std::nullopt;
    const FormulaPtr& p1 = f->f1;
    const FormulaPtr& p2 = f->f2;
    if (p1->kind != Formula::Prod || p2->kind != Formula::Prod)
      return std::nullopt;
    auto square_core = [](const FormulaPtr& p) -> const Formula* {
      const Formula* a = strip_abs(p->f1);
      const Formula* b = strip_abs(p->f2);
      if (a == b) return a;
      if (print_formula(p->f1) != print_formula(p->f2)) return nullptr;
      return a;
    };
    const Formula* re = square_core(p1);
    const Formula* im = square_core(p2);
    if (!re || !im) return std::nullopt;
    if (re->kind == Formula::ImIP && im->kind == Formula::ReIP)
      std::swap(re, im);
    if (re->kind != Formula::ReIP || im->kind != Formula::ImIP)
      return std::nullopt;
    if (print_term(re->t1) != print_term(im->t1) ||
        print_term(re->t2) != print_term(im->t2))
      return std::nullopt;
    auto aff = complex_affine_ip(re->t1, re->t2, var, env);
    if (!aff) return std::nullopt;
    QuadFunc q = quad_from_abs2(aff->first, aff->second);
    // keep only when the cap provably never binds
    if (qf_cheap_sup(q, r) > FieldReal(f->q, Rat(0))) return std::nullopt;
    return q;
  }

  std::optional<QuadFunc> extract_quad(const FormulaPtr& f,
                                       const std::string& var, const Env& env,
                                       int r, const Rat& eps, int depth) {
    if (f->lip.count(var) == 0)
      return qf_const(enclose(f, env, eps, depth));
    switch (f->kind) {
      case Formula::ReIP:
      case Formula::ImIP: {
        auto a1 = extract_affine(f->t1, var, env);
        auto a2 = extract_affine(f->t2, var, env);
        if (!a1 || !a2) return std::nullopt;
        return quad_from_ip(*a1, *a2, f->kind == Formula::ImIP);
      }
      case Formula::Half: {
        auto q = extract_quad(f->f1, var, env, r, eps, depth);
        if (!q) return std::nullopt;
        return qf_scale(rat_frac(1, 2), *q);
      }
      case Formula::Neg: {
        auto q = extract_quad(f->f1, var, env, r, eps, depth);
        if (!q) return std::nullopt;
        return qf_neg_plus(f->q, *q);
      }
      case Formula::TruncAdd: {
        if (auto q = match_abs_ip_sq(f, var, env, r)) return q;
        auto qa = extract_quad(f->f1, var, env, r, eps / 2, depth);
        if (!qa) return std::nullopt;
        auto qb = extract_quad(f->f2, var, env, r, eps / 2, depth);
        if (!qb) return std::nullopt;
        QuadFunc sum = qf_add(*qa, *qb);
        if (qf_cheap_sup(sum, r) > FieldReal(f->q, Rat(0)))
          return std::nullopt;  // cap may bind, stay with interval paths
        return sum;
      }
      default:
        return std::nullopt;
    }
  }

  StructImage quad_image(const QuadFunc& q, int r, const Rat& eps) {
    Rat r2 = Rat(r) * r;
    bool hz = qf_h_zero(q);
    bool lz = qf_l_zero(q);
    if (hz && lz) return {q.c, q.c, true, true};
    if (hz) {
      Interval s = field_real_sqrt(fvec_norm2(q.l), bits_for_eps(eps));
      return {q.c - iscale(Rat(r), s), q.c + iscale(Rat(r), s), true, true};
    }
    charge(static_cast<long>(q.h.size()) * static_cast<long>(q.h.size()));
    HermEigRange er = hermitian_eig_range(q.h, eps / (2 * r2));
    if (lz) {
      Interval lo_enc = q.c + iscale(r2, min0(er.lambda_min));
      Interval hi_enc = q.c + iscale(r2, er.lambda_max.clamp_nonneg());
      return {lo_enc, hi_enc, true, true};
    }
    Rat lhi = field_real_sqrt_hi(fvec_norm2(q.l), 48);
    Interval lo_enc(q.c.lo + r2 * rat_min(er.lambda_min.lo, Rat(0)) - r * lhi,
                    q.c.hi);
    Interval hi_enc(q.c.lo,
                    q.c.hi + r2 * rat_max(er.lambda_max.hi, Rat(0)) + r * lhi);
    return {lo_enc, hi_enc, false, false};
  }

  // Enclosures of the inf and sup of f over the radius-r ball in the
  // quantified variable, under an otherwise exact environment. Where the
  // tight flags hold, the corresponding enclosure pins the exact extremum;
  // loose sides are still sound outer bounds.
  std::optional<StructImage> struct_image(const FormulaPtr& f,
                                          const std::string& var,
                                          const Env& env, int r,
                                          const Rat& eps, int depth) {
    if (model_.dim > 64) return std::nullopt;
    if (f->lip.count(var) == 0) {
      Interval v = enclose(f, env, eps, depth);
      return StructImage{v, v, true, true};
    }
    switch (f->kind) {
      case Formula::ReIP:
      case Formula::ImIP: {
        auto q = extract_quad(f, var, env, r, eps, depth);
        if (!q) return std::nullopt;
        return quad_image(*q, r, eps);
      }
      case Formula::D: {
        auto a1 = extract_affine(f->t1, var, env);
        auto a2 = extract_affine(f->t2, var, env);
        if (!a1 || !a2) return std::nullopt;
        AffineTerm d;
        d.b = fvec_sub(a1->b, a2->b);
        if (a1->has_a && a2->has_a) {
          d.has_a = true;
          d.a = fmat_sub(a1->a, a2->a);
        } else if (a1->has_a) {
          d.has_a = true;
          d.a = a1->a;
        } else if (a2->has_a) {
          d.has_a = true;
          d.a = fmat_scale(-FieldScalar::one(), a2->a);
        }
        if (!d.has_a) return std::nullopt;  // x-free caught above
        QuadFunc q;
        FMat aa = fmat_mul(fmat_adjoint(d.a), d.a);
        if (!fmat_all_zero(aa)) q.h = std::move(aa);
        FVec l = fvec_scale(FieldScalar::from_rat(Rat(2)),
                            fmat_apply(fmat_adjoint(d.a), d.b));
        if (!fvec_all_zero(l)) q.l = std::move(l);
        q.c = field_real_enclosure(fvec_norm2(d.b));
        q.psd = true;
        StructImage si = quad_image(q, r, eps);
        Rat extra = rat_min(eps / 8, rat_pow2(-16));
        si.inf_enc = isqrt_enclosure(si.inf_enc.clamp_nonneg(), extra);
        si.sup_enc = isqrt_enclosure(si.sup_enc.clamp_nonneg(), extra);
        return si;
      }
      case Formula::Half: {
        auto a = struct_image(f->f1, var, env, r, eps, depth);
        if (!a) return std::nullopt;
        Rat h = rat_frac(1, 2);
        return StructImage{iscale(h, a->inf_enc), iscale(h, a->sup_enc),
                           a->inf_tight, a->sup_tight};
      }
      case Formula::Neg: {
        auto a = struct_image(f->f1, var, env, r, eps, depth);
        if (!a) return std::nullopt;
        Interval cap = Interval::point(f->q);
        return StructImage{cap - a->sup_enc, cap - a->inf_enc, a->sup_tight,
                           a->inf_tight};
      }
      case Formula::TruncSub: {
        bool dep1 = f->f1->lip.count(var) > 0;
        bool dep2 = f->f2->lip.count(var) > 0;
        if (dep1 && !dep2) {
          Interval b = enclose(f->f2, env, eps / 2, depth);
          auto a = struct_image(f->f1, var, env, r, eps / 2, depth);
          if (!a) return std::nullopt;
          return StructImage{(a->inf_enc - b).clamp_nonneg(),
                             (a->sup_enc - b).clamp_nonneg(), a->inf_tight,
                             a->sup_tight};
        }
        if (!dep1 && dep2) {
          Interval a = enclose(f->f1, env, eps / 2, depth);
          auto b = struct_image(f->f2, var, env, r, eps / 2, depth);
          if (!b) return std::nullopt;
          return StructImage{(a - b->sup_enc).clamp_nonneg(),
                             (a - b->inf_enc).clamp_nonneg(), b->sup_tight,
                             b->inf_tight};
        }
        auto qa = extract_quad(f->f1, var, env, r, eps / 2, depth);
        if (!qa) return std::nullopt;
        auto qb = extract_quad(f->f2, var, env, r, eps / 2, depth);
        if (!qb) return std::nullopt;
        StructImage si = quad_image(qf_sub(*qa, *qb), r, eps);
        si.inf_enc = si.inf_enc.clamp_nonneg();
        si.sup_enc = si.sup_enc.clamp_nonneg();
        return si;
      }
      case Formula::AbsDiff: {
        bool dep1 = f->f1->lip.count(var) > 0;
        bool dep2 = f->f2->lip.count(var) > 0;
        Interval m_enc, M_enc;
        bool tight = false;
        if (dep1 && !dep2) {
          Interval b = enclose(f->f2, env, eps / 2, depth);
          auto a = struct_image(f->f1, var, env, r, eps / 2, depth);
          if (!a) return std::nullopt;
          m_enc = a->inf_enc - b;
          M_enc = a->sup_enc - b;
          tight = a->inf_tight && a->sup_tight;
        } else if (!dep1 && dep2) {
          Interval a = enclose(f->f1, env, eps / 2, depth);
          auto b = struct_image(f->f2, var, env, r, eps / 2, depth);
          if (!b) return std::nullopt;
          m_enc = a - b->sup_enc;
          M_enc = a - b->inf_enc;
          tight = b->inf_tight && b->sup_tight;
        } else {
          auto qa = extract_quad(f->f1, var, env, r, eps / 2, depth);
          if (!qa) return std::nullopt;
          auto qb = extract_quad(f->f2, var, env, r, eps / 2, depth);
          if (!qb) return std::nullopt;
          StructImage si = quad_image(qf_sub(*qa, *qb), r, eps);
          m_enc = si.inf_enc;
          M_enc = si.sup_enc;
          tight = si.inf_tight && si.sup_tight;
        }
        auto [inf_enc, sup_enc] = abs_image_pair(m_enc, M_enc);
        return StructImage{inf_enc, sup_enc, tight, tight};
      }
      case Formula::Min:
      case Formula::Max: {
        auto a = struct_image(f->f1, var, env, r, eps / 2, depth);
        if (!a) return std::nullopt;
        auto b = struct_image(f->f2, var, env, r, eps / 2, depth);
        if (!b) return std::nullopt;
        if (f->kind == Formula::Max) {
          Interval sup = imax(a->sup_enc, b->sup_enc);
          Interval inf(rat_max(a->inf_enc.lo, b->inf_enc.lo), sup.hi);
          return StructImage{inf, sup, false, a->sup_tight && b->sup_tight};
        }
        Interval inf = imin(a->inf_enc, b->inf_enc);
        Interval sup(inf.lo, rat_min(a->sup_enc.hi, b->sup_enc.hi));
        return StructImage{inf, sup, a->inf_tight && b->inf_tight, false};
      }
      case Formula::TruncAdd: {
        if (auto q = extract_quad(f, var, env, r, eps, depth)) {
          StructImage si = quad_image(*q, r, eps);
          Interval cap = Interval::point(f->q);
          return StructImage{imin(si.inf_enc, cap), imin(si.sup_enc, cap),
                             si.inf_tight, si.sup_tight};
        }
        bool dep1 = f->f1->lip.count(var) > 0;
        bool dep2 = f->f2->lip.count(var) > 0;
        Interval cap = Interval::point(f->q);
        if (dep1 != dep2) {
          const FormulaPtr& fdep = dep1 ? f->f1 : f->f2;
          const FormulaPtr& ffree = dep1 ? f->f2 : f->f1;
          Interval b = enclose(ffree, env, eps / 2, depth);
          auto a = struct_image(fdep, var, env, r, eps / 2, depth);
          if (!a) return std::nullopt;
          return StructImage{imin(a->inf_enc + b, cap),
                             imin(a->sup_enc + b, cap), a->inf_tight,
                             a->sup_tight};
        }
        auto a = struct_image(f->f1, var, env, r, eps / 2, depth);
        if (!a) return std::nullopt;
        auto b = struct_image(f->f2, var, env, r, eps / 2, depth);
        if (!b) return std::nullopt;
        return StructImage{imin(a->inf_enc + b->inf_enc, cap),
                           imin(a->sup_enc + b->sup_enc, cap), false, false};
      }
      case Formula::Prod: {
        bool dep1 = f->f1->lip.count(var) > 0;
        bool dep2 = f->f2->lip.count(var) > 0;
        if (dep1 != dep2) {
          const FormulaPtr& fdep = dep1 ? f->f1 : f->f2;
          const FormulaPtr& ffree = dep1 ? f->f2 : f->f1;
          Interval b =
              imeet(enclose(ffree, env, eps / 2, depth), ffree->range);
          auto a = struct_image(fdep, var, env, r, eps / 2, depth);
          if (!a) return std::nullopt;
          Interval ienc = imeet(a->inf_enc, fdep->range);
          Interval senc = imeet(a->sup_enc, fdep->range);
          return StructImage{ienc * b, senc * b, a->inf_tight, a->sup_tight};
        }
        auto a = struct_image(f->f1, var, env, r, eps / 2, depth);
        if (!a) return std::nullopt;
        auto b = struct_image(f->f2, var, env, r, eps / 2, depth);
        if (!b) return std::nullopt;
        Rat lo = rat_max(Rat(0), a->inf_enc.lo) * rat_max(Rat(0), b->inf_enc.lo);
        Rat hi = a->sup_enc.hi * b->sup_enc.hi;
        return StructImage{Interval(lo, hi), Interval(lo, hi), false, false};
      }
      default:
        return std::nullopt;
    }
  }

  // ---- certified branch and bound over a quantifier block ----

  bool body_is_pure(const Block& blk) {
    if (!blk.body->opsens.empty()) return false;
    for (const auto& [name, w] : blk.body->lip) {
      (void)w;
      bool in_block = false;
      for (const auto& v : blk.vars)
        if (v.name == name) in_block = true;
      if (!in_block) return false;
    }
    if (!formula_constants(blk.body).empty()) return false;
    std::function<bool(const FormulaPtr&)> marked = [&](const FormulaPtr& g) {
      if (g->is_quantifier() && g->vsort.kind == Sort::Marked) return true;
      std::function<bool(const TermPtr&)> tm = [&](const TermPtr& t) -> bool {
        if (!t) return false;
        if (t->kind == Term::Qu || t->sort.kind == Sort::Marked) return true;
        return tm(t->lhs) || tm(t->rhs);
      };
      if (tm(g->t1) || tm(g->t2)) return true;
      if (g->f1 && marked(g->f1)) return true;
      if (g->f2 && marked(g->f2)) return true;
      return false;
    };
    return !marked(blk.body);
  }

  struct BBNode {
    std::vector<Interval> c;
    Rat bound;
    long id;
  };

  Interval quant_certified(const FormulaPtr& f, const Env& env, const Rat& eps,
                           int depth) {
    Block blk = collect_block(f);
    std::optional<Rat> seed;
    if (blk.vars.size() == 1) {
      auto si = struct_image(blk.body, blk.vars[0].name, env,
                             blk.vars[0].radius, eps / 2, depth);
      if (si) {
        if (f->kind == Formula::Sup && si->sup_tight &&
            si->sup_enc.width() <= eps)
          return si->sup_enc;
        if (f->kind == Formula::Inf && si->inf_tight &&
            si->inf_enc.width() <= eps)
          return si->inf_enc;
        seed = f->kind == Formula::Sup ? si->sup_enc.hi : si->inf_enc.lo;
      }
    }
    return bb_block(blk, env, eps, depth, seed);
  }

  Interval bb_block(const Block& blk, const Env& env, const Rat& eps,
                    int depth, std::optional<Rat> seed) {
    bool is_sup = blk.kind == Formula::Sup;
    Layout L = make_layout(blk.vars, model_.dim, body_is_pure(blk));
    if (L.coords.size() > 64)
      throw BudgetError("quantifier block spans " +
                        std::to_string(L.coords.size()) +
                        " real coordinates; certified refinement is infeasible "
                        "at this dimension");

    bool have_best = false;
    Rat best(0);
    auto eval_sample = [&](const std::vector<Rat>& x) {
      std::vector<FVec> vs = vecs_from_coords(L, x);
      Env e2 = env;
      for (size_t j = 0; j < L.vars.size(); ++j) {
        vs[j] = project_ball(std::move(vs[j]), L.vars[j].radius);
        e2[L.vars[j].name] = Binding::exact(vs[j]);
      }
      Interval v = enclose(blk.body, e2, eps / 2, depth + 1);
      Rat val = is_sup ? v.lo : v.hi;
      if (!have_best || (is_sup ? val > best : val < best)) {
        best = val;
        have_best = true;
        if (depth == 0) root_witness_ = witness_json(L, vs);
      }
    };

    auto bound_of = [&](const std::vector<Interval>& c) {
      std::vector<IVec> bs = boxes_from_coords(L, c);
      Env e2 = env;
      for (size_t j = 0; j < L.vars.size(); ++j)
        e2[L.vars[j].name] = Binding::boxed(std::move(bs[j]));
      Interval v = enclose(blk.body, e2, eps / 2, depth + 1);
      Rat b = is_sup ? v.hi : v.lo;
      if (seed) b = is_sup ? rat_min(b, *seed) : rat_max(b, *seed);
      return b;
    };

    // initial exact samples: origin, a canonical orthonormal tuple, its
    // negation where signs are free, and two seeded random tuples
    {
      std::vector<Rat> zero(L.coords.size(), Rat(0));
      eval_sample(zero);
      std::vector<Rat> basis(L.coords.size(), Rat(0));
      std::vector<Rat> nbasis(L.coords.size(), Rat(0));
      for (size_t j = 0; j < L.vars.size(); ++j) {
        int want = static_cast<int>(j) % model_.dim;
        for (size_t i = 0; i < L.coords.size(); ++i) {
          const LCoord& c = L.coords[i];
          if (c.var == static_cast<int>(j) && c.cx == want && !c.im) {
            basis[i] = Rat(1);
            nbasis[i] = c.nonneg ? Rat(1) : Rat(-1);
            break;
          }
        }
      }
      eval_sample(basis);
      if (nbasis != basis) eval_sample(nbasis);
      for (int t = 0; t < 2; ++t) {
        std::vector<Rat> x(L.coords.size());
        for (size_t i = 0; i < L.coords.size(); ++i) {
          Rat v = rat_frac(static_cast<long>(rng_() % 513) - 256, 256) *
                  L.vars[L.coords[i].var].radius;
          x[i] = L.coords[i].nonneg ? rat_abs(v) : v;
        }
        eval_sample(x);
      }
    }

    auto cmp = [is_sup](const BBNode& a, const BBNode& b) {
      if (a.bound != b.bound)
        return is_sup ? a.bound < b.bound : a.bound > b.bound;
      return a.id > b.id;
    };
    std::priority_queue<BBNode, std::vector<BBNode>, decltype(cmp)> queue(cmp);

    std::vector<Interval> root(L.coords.size());
    for (size_t i = 0; i < L.coords.size(); ++i) {
      Rat r(L.vars[L.coords[i].var].radius);
      root[i] = L.coords[i].nonneg ? Interval(Rat(0), r) : Interval(-r, r);
    }
    long next_id = 0;
    queue.push({root, bound_of(root), next_id++});

    const Rat min_width = rat_pow2(-40);
    while (!queue.empty()) {
      charge(1);
      BBNode top = queue.top();
      queue.pop();
      if (depth == 0) {
        best_partial_ = is_sup
                            ? Interval(best, rat_max(best, top.bound))
                            : Interval(rat_min(best, top.bound), best);
        have_partial_ = true;
      }
      Rat gap = is_sup ? top.bound - best : best - top.bound;
      // in heuristic mode an exhausted budget stops refinement; the current
      // state is still a sound enclosure
      if (gap <= eps || (heuristic_ && exhausted_))
        return is_sup ? Interval(best, rat_max(best, top.bound))
                      : Interval(rat_min(best, top.bound), best);

      size_t split = 0;
      Rat w(0);
      for (size_t i = 0; i < top.c.size(); ++i)
        if (top.c[i].width() > w) {
          w = top.c[i].width();
          split = i;
        }
      if (w < min_width)
        throw BudgetError(
            "certified refinement stalled: interval bounds are not "
            "converging on a box of width " + rat_to_string(w));

      Rat mid = top.c[split].mid();
      for (int half = 0; half < 2; ++half) {
        BBNode child;
        child.c = top.c;
        child.c[split] = half == 0 ? Interval(top.c[split].lo, mid)
                                   : Interval(mid, top.c[split].hi);
        if (box_infeasible(L, child.c)) continue;
        std::vector<Rat> center(child.c.size());
        for (size_t i = 0; i < child.c.size(); ++i) center[i] = child.c[i].mid();
        eval_sample(center);
        child.bound = bound_of(child.c);
        if (is_sup ? child.bound <= best : child.bound >= best) continue;
        child.id = next_id++;
        queue.push(std::move(child));
      }
    }
    return Interval(best, best);
  }

  // ---- heuristic mode: multi-start pattern search ----

  Interval quant_heuristic(const FormulaPtr& f, const Env& env, int depth) {
    if (exhausted_) return f->range;
    Block blk = collect_block(f);
    bool is_sup = blk.kind == Formula::Sup;
    Layout L = make_layout(blk.vars, model_.dim, body_is_pure(blk));
    Rat pt_eps = rat_frac(1, 64);

    json best_witness = json::object();
    auto point_val = [&](const std::vector<Rat>& x,
                         std::vector<FVec>* out_vs) {
      std::vector<FVec> vs = vecs_from_coords(L, x);
      Env e2 = env;
      for (size_t j = 0; j < L.vars.size(); ++j) {
        vs[j] = project_ball(std::move(vs[j]), L.vars[j].radius);
        e2[L.vars[j].name] = Binding::exact(vs[j]);
      }
      Interval v = blk.body->range;
      try {
        v = enclose(blk.body, e2, pt_eps, depth + 1);
      } catch (const BudgetError&) {
        // keep the static range for this sample; the search goes on
      }
      if (out_vs) *out_vs = std::move(vs);
      return v;
    };
    auto score = [&](const Interval& v) { return is_sup ? v.lo : -v.hi; };

    // candidate starts, best-first
    std::vector<std::vector<Rat>> starts;
    starts.emplace_back(L.coords.size(), Rat(0));
    for (int k = 0; k < model_.dim; ++k) {
      std::vector<Rat> x(L.coords.size(), Rat(0));
      bool hit = false;
      for (size_t i = 0; i < L.coords.size(); ++i)
        if (L.coords[i].cx == k && !L.coords[i].im) {
          x[i] = Rat(1);
          hit = true;
        }
      if (hit) starts.push_back(std::move(x));
    }
    for (int t = 0; t < 16; ++t) {
      std::vector<Rat> x(L.coords.size());
      for (size_t i = 0; i < L.coords.size(); ++i) {
        Rat v = rat_frac(static_cast<long>(rng_() % 513) - 256, 256) *
                L.vars[L.coords[i].var].radius;
        x[i] = L.coords[i].nonneg ? rat_abs(v) : v;
      }
      starts.push_back(std::move(x));
    }

    struct Scored {
      Rat s;
      size_t idx;
    };
    std::vector<Scored> ranked;
    bool have_best = false;
    Rat best_lo(0), best_hi(0);
    for (size_t i = 0; i < starts.size() && !exhausted_; ++i) {
      std::vector<FVec> vs;
      Interval v = point_val(starts[i], &vs);
      ranked.push_back({score(v), i});
      if (!have_best || (is_sup ? v.lo > best_lo : v.hi < best_hi)) {
        best_lo = v.lo;
        best_hi = v.hi;
        have_best = true;
        if (depth == 0) best_witness = witness_json(L, vs);
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Scored& a, const Scored& b) { return a.s > b.s; });

    long remaining = budget_ - used_;
    size_t restarts = static_cast<size_t>(
        std::clamp<long>(remaining / 2500, 2, 16));
    restarts = std::min(restarts, ranked.size());

    const Rat step_floor = rat_pow2(-22);
    for (size_t si = 0; si < restarts && !exhausted_; ++si) {
      std::vector<Rat> cur = starts[ranked[si].idx];
      Interval curv = point_val(cur, nullptr);
      Rat maxr(1);
      for (const auto& v : L.vars) maxr = rat_max(maxr, Rat(v.radius));
      Rat step = maxr / 2;
      while (step >= step_floor && !exhausted_) {
        bool improved = false;
        for (size_t i = 0; i < L.coords.size() && !exhausted_; ++i) {
          for (int dir = 0; dir < 2; ++dir) {
            std::vector<Rat> trial = cur;
            trial[i] += dir == 0 ? step : -step;
            Rat r(L.vars[L.coords[i].var].radius);
            Rat lo = L.coords[i].nonneg ? Rat(0) : -r;
            if (trial[i] > r) trial[i] = r;
            if (trial[i] < lo) trial[i] = lo;
            if (trial[i] == cur[i]) continue;
            std::vector<FVec> vs;
            Interval v = point_val(trial, &vs);
            bool better = is_sup ? v.lo > curv.lo : v.hi < curv.hi;
            if (better) {
              cur = std::move(trial);
              curv = v;
              improved = true;
              if (is_sup ? curv.lo > best_lo : curv.hi < best_hi) {
                best_lo = curv.lo;
                best_hi = curv.hi;
                if (depth == 0) best_witness = witness_json(L, vs);
              }
            }
          }
        }
        if (!improved) step /= 2;
      }
    }
    if (depth == 0 && !best_witness.empty()) root_witness_ = best_witness;
    if (!have_best) return f->range;
    return is_sup ? Interval(best_lo, f->range.hi)
                  : Interval(f->range.lo, best_hi);
  }
};

void require_closed(const FormulaPtr& f) {
  if (!f->lip.empty())
    throw InputError("formula has unbound variable '" + f->lip.begin()->first +
                     "'");
}

}  // namespace

void check_formula_against_model(const FormulaPtr& f, const Model& m) {
  for (const auto& [name, sort] : formula_constants(f)) {
    (void)sort;
    if (!m.constants.count(name))
      throw InputError("model has no constant named '" + name + "'");
  }
  size_t nops = m.operators.size();
  for (const auto& [name, w] : formula_opsens(f)) {
    (void)w;
    if (!name.empty() && name[0] == '#') {
      long k = std::stol(name.substr(1));
      if (k < 1 || static_cast<size_t>(k) > nops)
        throw InputError("word index #" + std::to_string(k) +
                         " out of range: model has " + std::to_string(nops) +
                         " operators");
    } else if (!m.operators.count(name)) {
      throw InputError("model has no operator named '" + name + "'");
    }
  }
  std::function<bool(const TermPtr&)> tm = [&](const TermPtr& t) -> bool {
    if (!t) return false;
    if (t->kind == Term::Qu || t->sort.kind == Sort::Marked) return true;
    return tm(t->lhs) || tm(t->rhs);
  };
  std::function<bool(const FormulaPtr&)> fm = [&](const FormulaPtr& g) -> bool {
    if (g->is_quantifier() && g->vsort.kind == Sort::Marked) return true;
    if (tm(g->t1) || tm(g->t2)) return true;
    if (g->f1 && fm(g->f1)) return true;
    if (g->f2 && fm(g->f2)) return true;
    return false;
  };
  if (fm(f) && !m.has_marked())
    throw InputError(
        "formula uses the marked sort but the model has no marked labels");
}

EvalResult eval_certified(const FormulaPtr& f, const Model& m, const Rat& eps,
                          long budget) {
  if (eps <= 0) throw InputError("eps must be positive");
  require_closed(f);
  check_formula_against_model(f, m);
  Evaluator ev(m, budget, false);
  try {
    Interval v = ev.run(f, eps);
    if (v.width() > eps)
      throw BudgetError(
          "combined enclosure width " + rat_to_string(v.width()) +
              " exceeds the requested eps",
          rat_to_string(v.lo), rat_to_string(v.hi),
          "increase the budget or relax eps");
    EvalResult res;
    res.value = v;
    res.mode = "certified";
    res.cost = ev.used();
    res.witnesses = ev.root_witness();
    return res;
  } catch (BudgetError& e) {
    if (e.best_lo.empty() && ev.have_partial()) {
      const Interval& p = ev.partial();
      throw BudgetError(e.what(), rat_to_string(p.lo), rat_to_string(p.hi),
                        "best enclosure so far was " + p.str() +
                            "; retry with a budget of at least " +
                            std::to_string(budget * 4));
    }
    throw;
  }
}

EvalResult eval_heuristic(const FormulaPtr& f, const Model& m, long budget) {
  require_closed(f);
  check_formula_against_model(f, m);
  Evaluator ev(m, budget, true);
  Interval v = ev.run(f, rat_frac(1, 1024));
  EvalResult res;
  res.value = v;
  res.mode = "heuristic";
  res.cost = ev.used();
  res.witnesses = ev.root_witness();
  return res;
}

}  // namespace hsw
