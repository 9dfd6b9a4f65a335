#include "hsw/interval.hpp"

#include <algorithm>

#include "hsw/errors.hpp"

namespace hsw {

Interval Interval::operator*(const Interval& o) const {
  Rat p1 = lo * o.lo, p2 = lo * o.hi, p3 = hi * o.lo, p4 = hi * o.hi;
  Rat l = rat_min(rat_min(p1, p2), rat_min(p3, p4));
  Rat h = rat_max(rat_max(p1, p2), rat_max(p3, p4));
  return Interval(l, h);
}

Interval Interval::abs() const {
  if (lo >= 0) return *this;
  if (hi <= 0) return Interval(-hi, -lo);
  return Interval(Rat(0), rat_max(-lo, hi));
}

Interval imin(const Interval& a, const Interval& b) {
  return Interval(rat_min(a.lo, b.lo), rat_min(a.hi, b.hi));
}

Interval imax(const Interval& a, const Interval& b) {
  return Interval(rat_max(a.lo, b.lo), rat_max(a.hi, b.hi));
}

Interval ihull(const Interval& a, const Interval& b) {
  return Interval(rat_min(a.lo, b.lo), rat_max(a.hi, b.hi));
}

Interval iscale(const Rat& c, const Interval& a) {
  if (c >= 0) return Interval(c * a.lo, c * a.hi);
  return Interval(c * a.hi, c * a.lo);
}

Interval imeet(const Interval& a, const Interval& b) {
  Interval r(rat_max(a.lo, b.lo), rat_min(a.hi, b.hi));
  if (!r.valid())
    throw InternalError("empty intersection of certified enclosures " +
                        a.str() + " and " + b.str());
  return r;
}

namespace {

// Floor of sqrt(v) * 2^bits as an integer, for rational v >= 0.
Int sqrt_floor_scaled(const Rat& v, long bits) {
  // floor(sqrt(n/d) * 2^b) = floor(sqrt(floor(n * 2^(2b) / d))) when the
  // inner floor does not cross an integer square; to stay on the safe side
  // we return isqrt(floor(n * 4^b / d)), which is <= true value and within
  // one ulp of it.
  Int num = v.get_num(), den = v.get_den();
  Int scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), num.get_mpz_t(),
               static_cast<mp_bitcnt_t>(2 * bits));
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  return int_isqrt(q);
}

}  // namespace

Interval rat_sqrt(const Rat& v, long bits) {
  if (v < 0) throw InternalError("rat_sqrt of negative rational");
  if (v == 0) return Interval(Rat(0), Rat(0));
  Int f = sqrt_floor_scaled(v, bits);
  Rat scale = rat_pow2(-bits);
  Rat lo = Rat(f) * scale;
  Rat hi = Rat(f + 2) * scale;  // +2 covers both floors' one-ulp slack
  // Tighten: exact check whether (f+1)/2^b already exceeds sqrt(v).
  Rat cand = Rat(f + 1) * scale;
  if (cand * cand >= v) hi = cand;
  if (lo * lo > v) lo = Rat(f - 1) * scale;  // defensive, should not trigger
  return Interval(lo, hi);
}

Interval isqrt_enclosure(const Interval& v, const Rat& extra) {
  Rat lo = rat_max(v.lo, Rat(0));
  Rat hi = rat_max(v.hi, Rat(0));
  if (hi == 0) return Interval(Rat(0), Rat(0));
  // Pick bits so that 2^-bits <= extra / 2.
  long bits = 1;
  Rat target = extra / 2;
  if (target <= 0) throw InternalError("isqrt_enclosure: extra must be > 0");
  while (rat_pow2(-bits) > target && bits < 4096) ++bits;
  Interval l = rat_sqrt(lo, bits);
  Interval h = rat_sqrt(hi, bits);
  return Interval(l.lo, h.hi);
}

const Interval& sqrt2_enclosure() {
  static const Interval cached = rat_sqrt(Rat(2), 96);
  return cached;
}

const Interval& pi_enclosure() {
  // 32 correct digits on both sides.
  static const Interval cached = [] {
    Int den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, 31);
    Int lon("31415926535897932384626433832795");
    return Interval(Rat(lon, den), Rat(lon + 1, den));
  }();
  return cached;
}

Interval field_real_enclosure(const FieldReal& v) {
  const Interval& s2 = sqrt2_enclosure();
  Interval y = iscale(v.y, s2);
  return Interval(v.x + y.lo, v.x + y.hi);
}

Rat field_real_sqrt_hi(const FieldReal& v, long bits) {
  return field_real_sqrt(v, bits).hi;
}

Interval field_real_sqrt(const FieldReal& v, long bits) {
  if (v.sign() < 0) throw InternalError("field_real_sqrt of negative value");
  Interval enc = field_real_enclosure(v);
  Rat lo = rat_max(enc.lo, Rat(0));
  return Interval(rat_sqrt(lo, bits).lo, rat_sqrt(enc.hi, bits).hi);
}

namespace {

// atan on [0, 1) via double argument halving then the alternating Taylor
// series; rigorous because the series has alternating terms of decreasing
// magnitude after reduction to |x| <= 0.415.
Interval atan_unit(const Rat& x, long bits) {
  if (x == 0) return Interval(Rat(0), Rat(0));
  Rat extra = rat_pow2(-bits - 4);
  // Halving: atan(x) = 2 atan(x / (1 + sqrt(1 + x^2))).
  Interval xi = Interval::point(x);
  int halvings = 0;
  while (halvings < 2) {
    Interval s = isqrt_enclosure(xi * xi + Interval(Rat(1)), extra);
    Interval den = s + Interval(Rat(1));
    // xi is a positive shrinking interval; divide via reciprocal endpoints.
    if (den.lo <= 0) throw InternalError("atan halving: denominator bound");
    xi = Interval(xi.lo / den.hi, xi.hi / den.lo);
    ++halvings;
  }
  // Now xi subset of (0, 0.415]; Taylor sum_{k} (-1)^k t^(2k+1)/(2k+1).
  // Evaluate with interval arithmetic; truncation error bounded by the first
  // omitted term (alternating, decreasing).
  Interval t = xi;
  Interval t2 = t * t;
  Interval sum(Rat(0));
  Interval power = t;
  int k = 0;
  Rat tol = rat_pow2(-bits - 3);
  while (true) {
    Interval term = iscale(Rat(1, 2 * k + 1), power);
    if (k % 2 == 0)
      sum = sum + term;
    else
      sum = sum - term;
    power = power * t2;
    ++k;
    Rat next_hi = rat_abs(power.hi) / (2 * k + 1);
    if (next_hi < tol && k >= 4) {
      // Absorb the truncation remainder.
      sum = sum + Interval(-next_hi, next_hi);
      break;
    }
    if (k > 200) throw InternalError("atan series failed to converge");
  }
  return iscale(Rat(4), sum);  // undo the two halvings
}

}  // namespace

Interval rat_atan2(const Rat& y, const Rat& x, long bits) {
  if (x == 0 && y == 0) throw InternalError("atan2(0, 0)");
  const Interval& pi = pi_enclosure();
  Interval half_pi = iscale(Rat(1, 2), pi);
  if (x == 0) return y > 0 ? half_pi : -half_pi;
  if (y == 0) return x > 0 ? Interval(Rat(0)) : pi;
  Rat ax = rat_abs(x), ay = rat_abs(y);
  // Reduce to atan of a ratio in (0, 1] to keep the series fast.
  bool swapped = ay > ax;  // then atan(a/b) = pi/2 - atan(b/a)
  Rat ratio = swapped ? ax / ay : ay / ax;
  Interval base = atan_unit(ratio, bits);
  if (swapped) base = half_pi - base;
  // Quadrants.
  if (x > 0 && y > 0) return base;
  if (x > 0 && y < 0) return -base;
  if (x < 0 && y > 0) return pi - base;
  return base - pi;  // x < 0, y < 0
}

}  // namespace hsw
