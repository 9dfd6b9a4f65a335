#include "hsw/marked.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "hsw/errors.hpp"
#include "hsw/interval.hpp"

namespace hsw {

namespace {

// floor(v * 2^k) / 2^k; rounding toward -inf keeps "rounded <= v" exact.
Rat dyadic_floor(const Rat& v, long k) {
  Rat scaled = v * rat_pow2(k);
  Int num;
  mpz_fdiv_q(num.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rat(num) / rat_pow2(k);
}

// Unimodular (1 - t^2 + 2ti) / (1 + t^2); exactly on the unit circle.
FieldScalar circle_point(const Rat& t) {
  Rat den = 1 + t * t;
  return FieldScalar::from_gaussian((1 - t * t) / den, 2 * t / den);
}

// |1 - circle_point(t)|^2 = 4t^2 / (1 + t^2).
Rat one_minus_circle_abs2(const Rat& t) { return 4 * t * t / (1 + t * t); }

// Parameter t with |1 - circle_point(t)| within 1% of the target; the window
// is verified exactly on squares.
Rat phase_parameter_for(const Rat& target) {
  // exact solution is t = g / sqrt(4 - g^2); 24 bits keep matrix entries
  // small while landing far inside the 1% window
  Rat s = target * target / (4 - target * target);
  Rat t = dyadic_floor(rat_sqrt(s, 32).lo, 24);
  Rat a2 = one_minus_circle_abs2(t);
  Rat lo = target * 99 / 100, hi = target * 101 / 100;
  if (!(lo * lo <= a2 && a2 <= hi * hi))
    throw InternalError("phase parameter missed its displacement window");
  return t;
}

// One exact unit coefficient per class: values (A + Bi + D*i*sqrt2)/F with
// A = 1-based class index (so classes stay distinct no matter what the
// imaginary parts do), B*D = 0 per class (keeping every |coeff|^2 rational),
// and F = sqrt(T) for T = sum n_l(A^2 + B^2 + 2D^2) a square or twice a
// square, so F lies in Q(sqrt 2) and the vector norm is exactly 1.
struct ClassCoeffs {
  std::vector<FieldScalar> coeff;
  FieldReal min_gap_sq;  // min over class pairs of |ci - cj|^2
  bool has_gap = false;  // false when there is a single class
};

// Lexicographically first (B_l, D_l) assignment with
// sum n_l (B_l^2 + 2 D_l^2) = m and B_l D_l = 0; pairs per class ordered by
// contributed value.
bool assign_imag(const std::vector<long>& sizes, size_t l, long m,
                 std::vector<std::pair<long, long>>& out) {
  if (l == sizes.size()) return m == 0;
  // tail classes can absorb anything only if some class remains
  for (long val = 0; sizes[l] * val <= m; ++val) {
    bool tail_can = l + 1 < sizes.size() || sizes[l] * val == m;
    if (!tail_can) continue;
    for (long d = 0; 2 * d * d <= val; ++d) {
      long rem = val - 2 * d * d;
      long b = static_cast<long>(int_isqrt(Int(rem)).get_si());
      if (b * b != rem) continue;
      if (b != 0 && d != 0) continue;  // keeps |coeff|^2 rational
      out[l] = {b, d};
      if (assign_imag(sizes, l + 1, m - sizes[l] * val, out)) return true;
    }
  }
  return false;
}

ClassCoeffs class_coefficients(const std::vector<std::vector<int>>& classes) {
  size_t k = classes.size();
  std::vector<long> sizes(k);
  long s0 = 0;
  for (size_t l = 0; l < k; ++l) {
    sizes[l] = static_cast<long>(classes[l].size());
    s0 += sizes[l] * static_cast<long>((l + 1) * (l + 1));
  }

  for (long t = std::max<long>(s0, 1); t <= 5 * s0 + 256; ++t) {
    Int root = int_isqrt(Int(t));
    FieldScalar normalizer;  // 1 / sqrt(t)
    if (root * root == t) {
      normalizer = FieldScalar::from_rat(rat_frac(1, root.get_si()));
    } else if (t % 2 == 0) {
      Int half = int_isqrt(Int(t / 2));
      if (2 * half * half != t) continue;
      // 1/(q sqrt2) = sqrt2 / (2q)
      normalizer = FieldScalar(Rat(0), Rat(0), rat_frac(1, 2 * half.get_si()),
                               Rat(0));
    } else {
      continue;
    }
    std::vector<std::pair<long, long>> imag(k);
    if (!assign_imag(sizes, 0, t - s0, imag)) continue;

    ClassCoeffs out;
    out.coeff.resize(k);
    FieldReal total(Rat(0), Rat(0));
    for (size_t l = 0; l < k; ++l) {
      FieldScalar v(Rat(static_cast<long>(l + 1)), Rat(imag[l].first), Rat(0),
                    Rat(imag[l].second));
      out.coeff[l] = v * normalizer;
      total = total + FieldReal::from_rat(Rat(sizes[l])) * out.coeff[l].abs2();
    }
    if (total != FieldReal::from_rat(Rat(1)))
      throw InternalError("class coefficients failed exact normalization");
    for (size_t i = 0; i < k; ++i)
      for (size_t j = i + 1; j < k; ++j) {
        FieldReal gap = (out.coeff[i] - out.coeff[j]).abs2();
        if (gap.sign() <= 0)
          throw InternalError("class coefficients collide");
        if (!out.has_gap || gap < out.min_gap_sq) out.min_gap_sq = gap;
        out.has_gap = true;
      }
    return out;
  }
  throw InternalError("no exact unit normalization found for class sizes");
}

struct BaseBuild {
  int dim = 0;
  std::vector<std::string> labels;
  FVec a1, a2;
  FieldReal min_gap_sq;
  bool any_cross = false;
  Rat r;
};

FVec spread_coeffs(const EqStructure& s,
                   const std::vector<std::vector<int>>& classes,
                   const std::vector<FieldScalar>& coeff) {
  FVec a(s.size, FieldScalar::zero());
  for (int x = 1; x <= s.size; ++x)
    a[x - 1] = coeff[partition_class_of(classes, x)];
  return a;
}

BaseBuild build_base(const EqStructure& s) {
  if (s.size < 1) throw InputError("structure size must be at least 1");
  for (const auto* classes : {&s.e1, &s.e2}) {
    long covered = 0;
    for (const auto& cls : *classes) covered += static_cast<long>(cls.size());
    if (covered != s.size)
      throw InputError("equivalence classes must partition 1..size");
  }
  BaseBuild b;
  b.dim = s.size;
  for (int x = 1; x <= s.size; ++x) b.labels.push_back("q" + std::to_string(x));

  ClassCoeffs c1 = class_coefficients(s.e1);
  ClassCoeffs c2 = class_coefficients(s.e2);
  b.a1 = spread_coeffs(s, s.e1, c1.coeff);
  b.a2 = spread_coeffs(s, s.e2, c2.coeff);

  if (c1.has_gap) { b.min_gap_sq = c1.min_gap_sq; b.any_cross = true; }
  if (c2.has_gap && (!b.any_cross || c2.min_gap_sq < b.min_gap_sq)) {
    b.min_gap_sq = c2.min_gap_sq;
    b.any_cross = true;
  }

  if (!b.any_cross) {
    b.r = rat_frac(1, 2);  // no cross-class pair constrains r
  } else {
    Rat gap_lo = field_real_sqrt(b.min_gap_sq, 64).lo;
    b.r = rat_min(dyadic_floor(gap_lo * 9 / 20, 20), rat_frac(1, 2));
    // class separation margin used by every downstream argument
    if (!(FieldReal::from_rat(4 * b.r * b.r) < b.min_gap_sq))
      throw InternalError("class gap margin 2r failed its exact check");
  }
  if (rat_sign(b.r) <= 0)
    throw InternalError("gap radius collapsed to zero");
  return b;
}

// Outer product a a^*, the orthogonal projection onto C*a for unit a.
FMat projector(const FVec& a) {
  size_t n = a.size();
  FMat p = fmat_zero(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) p[i][j] = a[i] * a[j].conj();
  return p;
}

FVec basis_vec(int dim, int k) {
  FVec e(dim, FieldScalar::zero());
  e[k] = FieldScalar::one();
  return e;
}

}  // namespace

std::pair<Model, Rat> build_marked_constants(const EqStructure& s) {
  BaseBuild base = build_base(s);

  // <b1,b2> = eps = 2t/(1+t^2) with target 0.45 r; the companion coordinate
  // (1-t^2)/(1+t^2) makes b2 an exact unit vector.
  Rat t = dyadic_floor(base.r * 9 / 40, 20);
  Rat den = 1 + t * t;
  Rat eps = 2 * t / den;
  if (!(0 < eps && eps < base.r && 4 * eps > base.r))
    throw InternalError("near-pair overlap eps missed (r/4, r)");

  Model m;
  m.dim = base.dim;
  m.marked = base.labels;
  m.constants["a1"] = base.a1;
  m.constants["a2"] = base.a2;
  m.constants["b1"] = basis_vec(base.dim, 0);
  FVec b2(base.dim, FieldScalar::zero());
  b2[0] = FieldScalar::from_rat(eps);
  if (base.dim >= 2) b2[1] = FieldScalar::from_rat((1 - t * t) / den);
  m.constants["b2"] = b2;

  if (fvec_norm2(base.a1) != FieldReal::from_rat(Rat(1)) ||
      fvec_norm2(base.a2) != FieldReal::from_rat(Rat(1)))
    throw InternalError("marked constants lost unit norm");
  if (fvec_inner(m.constants["b1"], b2) != FieldScalar::from_rat(eps))
    throw InternalError("near-pair overlap is not exactly eps");

  m.meta["construction"] = "marked-constants";
  m.meta["gap_r"] = rat_to_string(base.r);
  m.meta["epsilon"] = rat_to_string(eps);
  return {std::move(m), base.r};
}

Model build_dynamical_interpretation(const EqStructure& s) {
  BaseBuild base = build_base(s);
  if (base.r < rat_frac(1, 64))
    throw InputError(
        "class coefficient gaps below 1/64 cannot calibrate the phase "
        "ladder; use a smaller structure");

  // complement eigenvalue: |1 - lambda|^2 = 4/65, about 0.248
  Rat t1 = rat_frac(1, 8);
  FieldScalar lambda = circle_point(t1);
  Rat delta1_sq = one_minus_circle_abs2(t1);

  // displacement ladder; g3 drops to r^2/2 when r is small so that
  // g5^2 >= g3 keeps its margin
  Rat g4 = base.r / 8;
  Rat g3 = base.r < rat_frac(1, 32) ? Rat(base.r * base.r / 2)
                                    : Rat(base.r / 64);
  Rat g5 = base.r;
  Rat t3 = phase_parameter_for(g3);
  Rat t4 = phase_parameter_for(g4);
  Rat t5 = phase_parameter_for(g5);
  Rat g3_sq = one_minus_circle_abs2(t3);
  Rat g4_sq = one_minus_circle_abs2(t4);
  Rat g5_sq = one_minus_circle_abs2(t5);

  // Exact margin chain. With y = ||u - <a,u>a|| and the branch-1 window
  // {delta1 y < g3', |1 - ||u||| < g3'}:
  //   equivalent pair:   |<dq,u>|^2 <= 2 y^2 < 2 g3'^2/delta1^2 <= g4'^2
  //   separated pair:    |<dq,u>| >= (1 - g3' - y) 2r - sqrt2 y >= g5'
  //   value attained:    min-gap^2 - g4'^2 >= g3' and g5'^2 >= g3'
  Rat g3_hi = rat_sqrt(g3_sq, 64).hi;
  Rat g5_hi = rat_sqrt(g5_sq, 64).hi;
  Rat y_hi = rat_sqrt(g3_sq / delta1_sq, 64).hi;
  if (!(2 * g3_sq <= delta1_sq * g4_sq))
    throw InternalError("equivalent-pair overlap margin failed");
  if (!((1 - g3_hi - y_hi) * 2 * base.r - Rat(3) / 2 * y_hi >= g5_hi))
    throw InternalError("separated-pair projection margin failed");
  if (!(4 * base.r * base.r - g4_sq > g3_hi))
    throw InternalError("separated-pair attainment margin failed");
  if (!(g5_sq >= g3_hi))
    throw InternalError("equivalent-pair complement attainment margin failed");
  if (!(delta1_sq * 100 > 1))
    throw InternalError("complement eigenvalue distance fell below 1/10");

  Model m;
  m.dim = base.dim;
  m.marked = base.labels;
  m.constants["a1"] = base.a1;
  m.constants["a2"] = base.a2;

  FMat id = fmat_identity(base.dim);
  FieldScalar one = FieldScalar::one();
  for (int i = 0; i < 2; ++i) {
    const FVec& a = i == 0 ? base.a1 : base.a2;
    FMat u = fmat_add(fmat_scale(lambda, id),
                      fmat_scale(one - lambda, projector(a)));
    if (fmat_unitary_defect(u))
      throw InternalError("axis unitary is not exactly unitary");
    FVec fixed = fmat_apply(u, a);
    for (int j = 0; j < base.dim; ++j)
      if (fixed[j] != a[j])
        throw InternalError("axis unitary moved its own axis");
    m.operators[i == 0 ? "U1" : "U2"] = std::move(u);
  }
  m.operators["U3"] = fmat_scale(circle_point(t3), id);
  m.operators["U4"] = fmat_scale(circle_point(t4), id);
  m.operators["U5"] = fmat_scale(circle_point(t5), id);

  m.meta["construction"] = "dynamical-interpretation";
  m.meta["gap_r"] = rat_to_string(base.r);
  m.meta["lambda"] = lambda.encode();
  m.meta["mu3"] = circle_point(t3).encode();
  m.meta["mu4"] = circle_point(t4).encode();
  m.meta["mu5"] = circle_point(t5).encode();
  m.meta["delta1_sq"] = rat_to_string(delta1_sq);
  m.meta["g3_sq"] = rat_to_string(g3_sq);
  m.meta["g4_sq"] = rat_to_string(g4_sq);
  m.meta["g5_sq"] = rat_to_string(g5_sq);
  return m;
}

FieldScalar marked_class_coeff(const Model& m, const std::string& constant,
                               int x) {
  auto it = m.constants.find(constant);
  if (it == m.constants.end())
    throw InputError("model has no constant '" + constant + "'");
  if (x < 1 || x > static_cast<int>(it->second.size()))
    throw InputError("element index out of range");
  return it->second[x - 1];
}

Rat model_meta_rat(const Model& m, const std::string& key) {
  if (!m.meta.contains(key) || !m.meta[key].is_string())
    throw InputError("model meta lacks rational field '" + key + "'");
  return rat_from_string(m.meta[key].get<std::string>());
}

}  // namespace hsw
