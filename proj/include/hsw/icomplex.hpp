#pragma once

#include <vector>

#include "hsw/interval.hpp"

namespace hsw {

// Rectangular complex interval: re + i*im with interval parts.
struct IComplex {
  Interval re, im;

  IComplex() = default;
  IComplex(Interval r, Interval i) : re(std::move(r)), im(std::move(i)) {}
  static IComplex point(const Rat& r, const Rat& i) {
    return IComplex(Interval::point(r), Interval::point(i));
  }

  IComplex operator+(const IComplex& o) const {
    return IComplex(re + o.re, im + o.im);
  }
  IComplex operator-(const IComplex& o) const {
    return IComplex(re - o.re, im - o.im);
  }
  IComplex operator*(const IComplex& o) const {
    return IComplex(re * o.re - im * o.im, re * o.im + im * o.re);
  }
  IComplex conj() const { return IComplex(re, -im); }

  // Enclosure of |z|^2.
  Interval abs2() const {
    Interval r2 = re * re, i2 = im * im;
    return (r2 + i2).clamp_nonneg();
  }

  Rat max_width() const { return rat_max(re.width(), im.width()); }
};

using IVec = std::vector<IComplex>;

// Enclosure of a field scalar using the cached sqrt2 enclosure.
IComplex field_to_icomplex(const FieldScalar& z);

// Conjugate-linear in the FIRST argument: sum conj(u_k) v_k.
IComplex ivec_inner(const IVec& u, const IVec& v);

Interval ivec_norm2(const IVec& v);

IVec ivec_sub(const IVec& a, const IVec& b);
IVec ivec_add(const IVec& a, const IVec& b);
IVec ivec_scale(const IComplex& c, const IVec& v);

}  // namespace hsw
