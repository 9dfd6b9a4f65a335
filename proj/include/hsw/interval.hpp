#pragma once

#include <string>

#include "hsw/field.hpp"
#include "hsw/rational.hpp"

namespace hsw {

// Closed interval with exact rational endpoints. All operations return
// enclosures of the exact image set; nothing here rounds.
struct Interval {
  Rat lo, hi;

  Interval() : lo(0), hi(0) {}
  Interval(Rat p) : lo(p), hi(std::move(p)) {}
  Interval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {}

  static Interval point(const Rat& p) { return Interval(p, p); }

  bool valid() const { return lo <= hi; }
  Rat width() const { return hi - lo; }
  Rat mid() const { return (lo + hi) / 2; }
  bool contains(const Rat& p) const { return lo <= p && p <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  Interval operator+(const Interval& o) const {
    return Interval(lo + o.lo, hi + o.hi);
  }
  Interval operator-(const Interval& o) const {
    return Interval(lo - o.hi, hi - o.lo);
  }
  Interval operator-() const { return Interval(-hi, -lo); }
  Interval operator*(const Interval& o) const;

  Interval abs() const;
  // max(0, .) applied pointwise; enclosure of truncated subtraction lives in
  // the formula evaluator.
  Interval clamp_nonneg() const {
    return Interval(rat_max(lo, Rat(0)), rat_max(hi, Rat(0)));
  }

  std::string str() const {
    return "[" + rat_to_string(lo) + ", " + rat_to_string(hi) + "]";
  }
};

Interval imin(const Interval& a, const Interval& b);
Interval imax(const Interval& a, const Interval& b);
Interval ihull(const Interval& a, const Interval& b);
Interval iscale(const Rat& c, const Interval& a);

// Intersection; throws InternalError when empty (certified enclosures of the
// same quantity always intersect).
Interval imeet(const Interval& a, const Interval& b);

// Enclosure of sqrt over a nonnegative interval. Negative lower endpoints
// are clipped to 0 (callers use this for values known to be >= 0 whose
// enclosure may dip below). `extra` bounds the additional width introduced
// on top of the intrinsic width of the image.
Interval isqrt_enclosure(const Interval& v, const Rat& extra);

// sqrt of a single rational, enclosure of width <= 2^-bits.
Interval rat_sqrt(const Rat& v, long bits);

// Cached enclosure of sqrt2 with width <= 2^-96.
const Interval& sqrt2_enclosure();

// Enclosure of pi with width < 1e-30.
const Interval& pi_enclosure();

// Interval containing x + y*sqrt2.
Interval field_real_enclosure(const FieldReal& v);

// Upper bound (as a rational) for sqrt of a FieldReal known nonnegative.
Rat field_real_sqrt_hi(const FieldReal& v, long bits);
// Two-sided sqrt enclosure of a nonnegative FieldReal.
Interval field_real_sqrt(const FieldReal& v, long bits);

// atan2(y, x) for exact rational (x, y) != (0, 0); result in (-pi, pi],
// enclosure width <= 2^-bits + pi-enclosure slack.
Interval rat_atan2(const Rat& y, const Rat& x, long bits);

}  // namespace hsw
