#pragma once

#include <gmpxx.h>

#include <string>

namespace hsw {

using Rat = mpq_class;
using Int = mpz_class;

// Canonical form "p/q" with q > 0 omitted when 1, e.g. "3", "-1/2".
std::string rat_to_string(const Rat& r);

// Accepts "p", "p/q", decimal ("1.25", ".5") and scientific ("1e-3",
// "2.5e2") notation; everything is converted exactly. Throws InputError.
Rat rat_from_string(const std::string& s);

// 2^k for k possibly negative.
Rat rat_pow2(long k);

// Canonicalized fraction. Raw mpq_class(p, q) keeps p/q unreduced, which
// breaks exact equality; always build variable fractions through this.
inline Rat rat_frac(long num, long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline int rat_sign(const Rat& r) { return sgn(r); }

inline Rat rat_abs(const Rat& r) { return abs(r); }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a > b ? a : b; }

// Floor square root of a nonnegative integer.
Int int_isqrt(const Int& n);

// Decimal rendering with the given number of fractional digits, correctly
// truncated toward zero; used for human-readable report fields only.
std::string rat_to_decimal(const Rat& r, int digits);

double rat_to_double(const Rat& r);

// Nearest rational with denominator 2^k.
Rat rat_dyadic_round(double x, long k);

}  // namespace hsw
