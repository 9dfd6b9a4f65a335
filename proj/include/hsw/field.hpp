#pragma once

#include <string>

#include "hsw/rational.hpp"

namespace hsw {

// Element of the real quadratic field Q(sqrt 2): x + y*sqrt2.
// Sign, comparison and arithmetic are exact.
struct FieldReal {
  Rat x, y;

  FieldReal() : x(0), y(0) {}
  FieldReal(Rat x_, Rat y_) : x(std::move(x_)), y(std::move(y_)) {}
  static FieldReal from_rat(const Rat& r) { return FieldReal(r, Rat(0)); }

  bool is_rational() const { return y == 0; }

  FieldReal operator+(const FieldReal& o) const {
    return FieldReal(x + o.x, y + o.y);
  }
  FieldReal operator-(const FieldReal& o) const {
    return FieldReal(x - o.x, y - o.y);
  }
  FieldReal operator*(const FieldReal& o) const {
    return FieldReal(x * o.x + 2 * y * o.y, x * o.y + y * o.x);
  }
  FieldReal operator-() const { return FieldReal(-x, -y); }
  bool operator==(const FieldReal& o) const { return x == o.x && y == o.y; }
  bool operator!=(const FieldReal& o) const { return !(*this == o); }

  // Exact sign of x + y*sqrt2 via rational case analysis.
  int sign() const;
  bool operator<(const FieldReal& o) const { return (*this - o).sign() < 0; }
  bool operator<=(const FieldReal& o) const { return (*this - o).sign() <= 0; }
  bool operator>(const FieldReal& o) const { return (*this - o).sign() > 0; }
  bool operator>=(const FieldReal& o) const { return (*this - o).sign() >= 0; }

  FieldReal abs() const { return sign() < 0 ? -*this : *this; }

  // Multiplicative inverse (x - y sqrt2)/(x^2 - 2 y^2); throws on zero.
  FieldReal inverse() const;
  FieldReal operator/(const FieldReal& o) const { return *this * o.inverse(); }

  double to_double() const;
  // Canonical text "x+y*sqrt2" via the 4-component scalar encoding with zero
  // imaginary parts; see FieldScalar::encode.
  std::string to_string() const;
};

// Element of Q(i, sqrt 2), stored as (a + b i) + (c + d i) sqrt 2
// with rational a, b, c, d. This field contains all 8th roots of unity and
// is closed under the matrix entries used across the toolkit.
struct FieldScalar {
  Rat a, b, c, d;

  FieldScalar() : a(0), b(0), c(0), d(0) {}
  FieldScalar(Rat a_, Rat b_, Rat c_, Rat d_)
      : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}

  static FieldScalar zero() { return FieldScalar(); }
  static FieldScalar one() { return FieldScalar(Rat(1), Rat(0), Rat(0), Rat(0)); }
  static FieldScalar i() { return FieldScalar(Rat(0), Rat(1), Rat(0), Rat(0)); }
  static FieldScalar sqrt2() {
    return FieldScalar(Rat(0), Rat(0), Rat(1), Rat(0));
  }
  static FieldScalar from_rat(const Rat& r) {
    return FieldScalar(r, Rat(0), Rat(0), Rat(0));
  }
  static FieldScalar from_real(const FieldReal& r) {
    return FieldScalar(r.x, Rat(0), r.y, Rat(0));
  }
  // Gaussian rational re + im*i.
  static FieldScalar from_gaussian(const Rat& re, const Rat& im) {
    return FieldScalar(re, im, Rat(0), Rat(0));
  }

  bool is_zero() const { return a == 0 && b == 0 && c == 0 && d == 0; }
  bool is_real() const { return b == 0 && d == 0; }

  FieldReal real() const { return FieldReal(a, c); }
  FieldReal imag() const { return FieldReal(b, d); }

  FieldScalar operator+(const FieldScalar& o) const {
    return FieldScalar(a + o.a, b + o.b, c + o.c, d + o.d);
  }
  FieldScalar operator-(const FieldScalar& o) const {
    return FieldScalar(a - o.a, b - o.b, c - o.c, d - o.d);
  }
  FieldScalar operator-() const { return FieldScalar(-a, -b, -c, -d); }
  FieldScalar operator*(const FieldScalar& o) const;

  FieldScalar conj() const { return FieldScalar(a, -b, c, -d); }

  // Multiplicative inverse; throws InternalError on zero.
  FieldScalar inverse() const;

  // |z|^2 as an exact element of Q(sqrt 2).
  FieldReal abs2() const;

  bool operator==(const FieldScalar& o) const {
    return a == o.a && b == o.b && c == o.c && d == o.d;
  }
  bool operator!=(const FieldScalar& o) const { return !(*this == o); }

  // Text encoding "a/b,c/d,e/f,g/h": four canonical rationals in the order
  // rational part, i part, sqrt2 part, i*sqrt2 part.
  std::string encode() const;
  static FieldScalar decode(const std::string& s);

  double re_double() const;
  double im_double() const;
};

inline FieldScalar operator*(const Rat& r, const FieldScalar& z) {
  return FieldScalar(r * z.a, r * z.b, r * z.c, r * z.d);
}

}  // namespace hsw
