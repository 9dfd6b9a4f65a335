#include "hsw/degree.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <sstream>

#include "hsw/errors.hpp"

namespace hsw {

namespace {

// Normalizes an operator name used by a formula to its model-side name:
// "#k" (the word sugar's positional reference) maps to "Uk", since a degree
// model carries exactly U1..Uops and lexicographic order matches positional
// order for ops <= 9 (the parameter gate keeps ops far below that).
std::string normalize_op(const std::string& name) {
  if (!name.empty() && name[0] == '#') return "U" + name.substr(1);
  return name;
}

int op_index(const std::string& name) {
  std::string n = normalize_op(name);
  if (n.size() < 2 || n[0] != 'U') return -1;
  for (size_t i = 1; i < n.size(); ++i)
    if (!isdigit(static_cast<unsigned char>(n[i]))) return -1;
  if (n[1] == '0') return -1;
  int k = 0;
  for (size_t i = 1; i < n.size(); ++i) {
    k = k * 10 + (n[i] - '0');
    if (k > 1000) return -1;
  }
  return k;
}

void check_closed_over(const FormulaPtr& f, int ops) {
  if (!f->lip.empty())
    throw InputError("degree needs a closed sentence; free variable: " +
                     f->lip.begin()->first);
  for (const auto& [name, w] : f->opsens) {
    int k = op_index(name);
    if (k < 1 || k > ops)
      throw InputError("degree formulas range over operators U1..U" +
                       std::to_string(ops) + "; found " + name);
  }
}

// Sum of per-operator sensitivities, the formula-value Lipschitz constant
// with respect to simultaneous operator-norm perturbations of all
// operators.
Rat total_opsens(const FormulaPtr& f) {
  Rat s(0);
  for (const auto& [name, w] : f->opsens) s += w;
  return s;
}

// Operator-norm distance from an arbitrary unitary to the net built on
// circle grids of chord radius rho: the diagonal phase factor contributes
// max_i chord_i <= rho and each Givens factor at most (3/2) rho for its
// rotation (|dc| + |ds| <= sqrt(2) chord) plus rho for its phase.
Rat covering_weight(int dim) {
  return Rat(1) + rat_frac(5 * dim * (dim - 1), 4);
}

struct ParamPoint {
  Rat c, s;
};

// Shared state behind the two streams returned by degree_streams: level
// sweeps are computed once and read by both sides.
struct NetSweeper {
  FormulaPtr f;
  int dim = 0;
  int ops = 0;
  Rat eval_eps;
  long long budget = 0;
  long long spent = 0;
  bool dead = false;  // budget consumed or level cap reached

  struct Level {
    Rat lo, hi;
    bool complete = false;
    std::string lo_witness;
  };
  std::vector<Level> levels;

  int param_count() const { return ops * dim * dim; }

  // Renders the parameter tuple of one operator compactly.
  static std::string render_op(int dim,
                               const std::vector<std::pair<Rat, Rat>>& ps) {
    std::ostringstream out;
    auto pt = [&](const std::pair<Rat, Rat>& p) {
      out << "(" << rat_to_string(p.first) << "," << rat_to_string(p.second)
          << ")";
    };
    out << "phases ";
    for (int i = 0; i < dim; ++i) pt(ps[i]);
    int k = dim;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        out << " G" << i + 1 << j + 1 << " rot";
        pt(ps[k++]);
        out << " phase";
        pt(ps[k++]);
      }
    return out.str();
  }

  // Evaluates f on the model at one net point; returns nullopt when the
  // remaining budget cannot cover it.
  std::optional<Interval> eval_point(
      const std::vector<std::pair<Rat, Rat>>& params) {
    Model m;
    m.dim = dim;
    int per = dim * dim;
    for (int k = 0; k < ops; ++k) {
      std::vector<std::pair<Rat, Rat>> slice(params.begin() + k * per,
                                             params.begin() + (k + 1) * per);
      m.operators["U" + std::to_string(k + 1)] =
          unitary_from_params(dim, slice);
    }
    long remaining = static_cast<long>(
        std::min<long long>(budget - spent, kDefaultEvalBudget));
    if (remaining <= 0) return std::nullopt;
    try {
      EvalResult r = eval_certified(f, m, eval_eps, remaining);
      spent += r.cost;
      return r.value;
    } catch (const BudgetError&) {
      spent = budget;
      return std::nullopt;
    }
  }

  // Computes level k (all parameter tuples over circle_grid(k)), charging
  // the shared budget as it goes. Levels whose sweep is cut short are
  // marked incomplete: their partial max is a sound lower bound but covers
  // nothing, so the upper side ignores them.
  const Level& level(int k) {
    while (static_cast<int>(levels.size()) <= k) {
      if (dead) break;
      int next = static_cast<int>(levels.size());
      if (next > 62) {  // net slack below any practical eps
        dead = true;
        break;
      }
      Level lv;
      lv.lo = f->range.lo;
      lv.hi = f->range.lo;
      auto grid = circle_grid(next);
      int p = param_count();
      std::vector<size_t> odo(p, 0);
      std::vector<std::pair<Rat, Rat>> params(p);
      bool cut = false;
      long long index = 0;
      bool any = false;
      while (true) {
        for (int i = 0; i < p; ++i) params[i] = grid[odo[i]];
        auto v = eval_point(params);
        if (!v) {
          cut = true;
          break;
        }
        if (!any || v->lo > lv.lo) {
          lv.lo = v->lo;
          std::ostringstream w;
          w << "dim " << dim << " level " << next << " point " << index;
          for (int k2 = 0; k2 < ops; ++k2) {
            std::vector<std::pair<Rat, Rat>> slice(
                params.begin() + k2 * dim * dim,
                params.begin() + (k2 + 1) * dim * dim);
            w << "; U" << k2 + 1 << " " << render_op(dim, slice);
          }
          lv.lo_witness = w.str();
        }
        if (!any || v->hi > lv.hi) lv.hi = v->hi;
        any = true;
        ++index;
        int i = 0;
        while (i < p && ++odo[i] == grid.size()) odo[i++] = 0;
        if (i == p) break;
      }
      lv.complete = !cut;
      // one model per level when p == 0; further levels cannot improve
      if (cut || p == 0) dead = true;
      levels.push_back(std::move(lv));
    }
    return levels[std::min(levels.size() - 1, static_cast<size_t>(k))];
  }
};

}  // namespace

DegreeResult ershov_sandwich(BoundStream& lower, BoundStream& upper,
                             const Rat& eps, long long budget) {
  if (eps < 0) throw InputError("sandwich eps must be nonnegative");
  if (budget < 1) throw InputError("sandwich budget must be positive");
  DegreeResult res;
  std::optional<Rat> lo, hi;
  bool lower_done = false, upper_done = false;
  auto finish_success = [&]() {
    res.value = Interval(*lo, *hi);
    res.success = true;
    return res;
  };
  auto check = [&]() {
    if (lo && hi && *lo > *hi)
      throw InternalError("lower bound crossed upper bound in the sandwich");
    return lo && hi && *hi - *lo <= eps;
  };
  while (!(lower_done && upper_done)) {
    if (!lower_done) {
      auto p = lower.next();
      if (!p) {
        lower_done = true;
      } else {
        res.steps += p->cost;
        if (!lo || p->value > *lo) {
          lo = p->value;
          res.lower_witness = p->witness;
        }
      }
    }
    if (check()) return finish_success();
    if (res.steps >= budget) break;
    if (!upper_done) {
      auto p = upper.next();
      if (!p) {
        upper_done = true;
      } else {
        res.steps += p->cost;
        if (!hi || p->value < *hi) {
          hi = p->value;
          res.upper_witness = p->witness;
        }
      }
    }
    if (check()) return finish_success();
    if (res.steps >= budget) break;
  }
  res.success = false;
  res.note = res.steps >= budget ? "step budget exhausted"
                                 : "bound streams exhausted";
  if (lo && hi)
    res.value = Interval(*lo, *hi);
  else if (lo)
    res.value = Interval(*lo, *lo);
  else if (hi)
    res.value = Interval(*hi, *hi);
  return res;
}

std::vector<std::pair<Rat, Rat>> circle_grid(int level) {
  if (level < 0) throw InputError("circle grid level must be nonnegative");
  if (level > 62) throw InputError("circle grid level out of range");
  long m = 1L << level;
  std::vector<std::pair<Rat, Rat>> pts;
  pts.reserve(2 * m);
  auto stereo = [](const Rat& t) {
    Rat den = Rat(1) + t * t;
    return std::pair<Rat, Rat>{(Rat(1) - t * t) / den, Rat(2) * t / den};
  };
  for (long j = 0; j <= m; ++j) {
    Rat t = rat_frac(2 * j - m, m);
    pts.push_back(stereo(t));
  }
  for (long j = 1; j < m; ++j) {
    Rat u = rat_frac(2 * j - m, m);
    auto [c, s] = stereo(u);
    pts.emplace_back(-c, s);
  }
  return pts;
}

int unitary_param_count(int dim) { return dim * dim; }

FMat unitary_from_params(int dim,
                         const std::vector<std::pair<Rat, Rat>>& params) {
  if (dim < 1) throw InputError("unitary dimension must be positive");
  if (static_cast<int>(params.size()) != unitary_param_count(dim))
    throw InputError("unitary parameter tuple has the wrong length");
  for (const auto& [c, s] : params)
    if (c * c + s * s != Rat(1))
      throw InputError("unitary parameters must be exact circle points");

  FMat u(dim, FVec(dim, FieldScalar::zero()));
  for (int i = 0; i < dim; ++i)
    u[i][i] = FieldScalar::from_gaussian(params[i].first, params[i].second);

  int k = dim;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      auto [c, s] = params[k++];
      auto [pc, ps] = params[k++];
      // G = [[c, -s e^{i psi}], [s e^{-i psi}, c]] on rows/cols i, j
      FMat g(dim, FVec(dim, FieldScalar::zero()));
      for (int r = 0; r < dim; ++r) g[r][r] = FieldScalar::one();
      g[i][i] = FieldScalar::from_rat(c);
      g[j][j] = FieldScalar::from_rat(c);
      g[i][j] = FieldScalar::from_gaussian(-s * pc, -s * ps);
      g[j][i] = FieldScalar::from_gaussian(s * pc, -s * ps);
      u = fmat_mul(u, g);
    }
  return u;
}

std::pair<BoundStream, BoundStream> degree_streams(const FormulaPtr& f,
                                                   int dim, int ops,
                                                   const Rat& eval_eps,
                                                   long long budget) {
  if (dim < 1) throw InputError("degree dimension must be positive");
  if (ops < 0) throw InputError("operator count must be nonnegative");
  if (eval_eps <= 0) throw InputError("evaluation eps must be positive");
  check_closed_over(f, ops);
  {
    // probe with identities so constant and marked-sort uses fail up front
    Model probe;
    probe.dim = dim;
    for (int k = 1; k <= ops; ++k)
      probe.operators["U" + std::to_string(k)] = fmat_identity(dim);
    check_formula_against_model(f, probe);
  }

  auto sw = std::make_shared<NetSweeper>();
  sw->f = f;
  sw->dim = dim;
  sw->ops = ops;
  sw->eval_eps = eval_eps;
  sw->budget = budget;

  Rat sens = total_opsens(f) * covering_weight(dim);

  BoundStream lower, upper;
  auto lstate = std::make_shared<std::pair<int, Rat>>(-1, f->range.lo);
  lower.next = [sw, lstate]() -> std::optional<BoundPull> {
    if (lstate->first < 0) {
      lstate->first = 0;
      return BoundPull{sw->f->range.lo, 0, "static range"};
    }
    if (sw->dead && lstate->first >= static_cast<int>(sw->levels.size()))
      return std::nullopt;
    long long before = sw->spent;
    const auto& lv = sw->level(lstate->first);
    int got = std::min(lstate->first,
                       static_cast<int>(sw->levels.size()) - 1);
    lstate->first = got + 1;
    Rat v = rat_max(lstate->second, lv.lo);
    lstate->second = v;
    std::string w = lv.lo_witness.empty() ? "static range" : lv.lo_witness;
    return BoundPull{v, sw->spent - before, w};
  };

  auto ustate = std::make_shared<std::pair<int, Rat>>(-1, f->range.hi);
  upper.next = [sw, ustate, sens]() -> std::optional<BoundPull> {
    if (ustate->first < 0) {
      ustate->first = 0;
      return BoundPull{sw->f->range.hi, 0, "static range"};
    }
    if (sw->dead && ustate->first >= static_cast<int>(sw->levels.size()))
      return std::nullopt;
    long long before = sw->spent;
    const auto& lv = sw->level(ustate->first);
    int got =
        std::min(ustate->first, static_cast<int>(sw->levels.size()) - 1);
    ustate->first = got + 1;
    if (!lv.complete) {
      // a partial sweep covers nothing; report the spent cost if any
      if (sw->spent > before)
        return BoundPull{ustate->second, sw->spent - before, "incomplete net"};
      return std::nullopt;
    }
    Rat slack = rat_pow2(1 - got) * sens;
    Rat v = rat_min(ustate->second, lv.hi + slack);
    ustate->second = v;
    std::ostringstream w;
    w << "dim " << sw->dim << " level " << got << " net, covering slack "
      << rat_to_string(slack);
    return BoundPull{v, sw->spent - before, w.str()};
  };
  return {std::move(lower), std::move(upper)};
}

DegreeResult degree_ndim(const FormulaPtr& f, int dim, int ops,
                         const Rat& eps, long long budget, int param_gate) {
  if (eps <= 0) throw InputError("degree eps must be positive");
  if (dim < 1) throw InputError("degree dimension must be positive");
  if (ops < 0) throw InputError("operator count must be nonnegative");
  check_closed_over(f, ops);
  int params = ops * dim * dim;
  if (params > param_gate) {
    throw BudgetError(
        "certified degree is gated at " + std::to_string(param_gate) +
            " net parameters; dimension " + std::to_string(dim) + " with " +
            std::to_string(ops) + " operators needs " + std::to_string(params),
        rat_to_string(f->range.lo), rat_to_string(f->range.hi),
        std::to_string(params));
  }
  Rat eval_eps = eps / 2;
  auto [lower, upper] = degree_streams(f, dim, ops, eval_eps, budget);
  return ershov_sandwich(lower, upper, eps, budget);
}

std::vector<ProfileEntry> degree_fd_lower(const FormulaPtr& f, int max_dim,
                                          const Rat& eps, long long budget) {
  if (max_dim < 1) throw InputError("profile needs max dimension >= 1");
  if (eps <= 0) throw InputError("profile eps must be positive");
  int ops = 0;
  for (const auto& [name, w] : f->opsens) {
    int k = op_index(name);
    if (k < 1)
      throw InputError("degree formulas range over operators U1..Ut; found " +
                       name);
    ops = std::max(ops, k);
  }
  check_closed_over(f, ops);

  std::vector<ProfileEntry> profile;
  long long share = std::max<long long>(budget / max_dim, 1);
  Rat best = f->range.lo;
  std::string witness = "static range";
  for (int n = 1; n <= max_dim; ++n) {
    auto streams = degree_streams(f, n, ops, eps, share);
    BoundStream& lower = streams.first;
    ProfileEntry e;
    e.dim = n;
    while (auto p = lower.next()) {
      e.cost += p->cost;
      if (p->value > best) {
        best = p->value;
        witness = p->witness;
      }
    }
    e.lower = best;
    e.witness = witness;
    profile.push_back(std::move(e));
  }
  return profile;
}

}  // namespace hsw
