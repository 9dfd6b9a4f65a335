#include "hsw/icomplex.hpp"

#include "hsw/errors.hpp"

namespace hsw {

IComplex field_to_icomplex(const FieldScalar& z) {
  return IComplex(field_real_enclosure(z.real()),
                  field_real_enclosure(z.imag()));
}

IComplex ivec_inner(const IVec& u, const IVec& v) {
  if (u.size() != v.size()) throw InternalError("inner product size mismatch");
  IComplex acc;
  for (size_t k = 0; k < u.size(); ++k) acc = acc + u[k].conj() * v[k];
  return acc;
}

Interval ivec_norm2(const IVec& v) {
  Interval acc(Rat(0));
  for (const auto& z : v) acc = acc + z.abs2();
  return acc.clamp_nonneg();
}

IVec ivec_sub(const IVec& a, const IVec& b) {
  if (a.size() != b.size()) throw InternalError("vector size mismatch");
  IVec r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
  return r;
}

IVec ivec_add(const IVec& a, const IVec& b) {
  if (a.size() != b.size()) throw InternalError("vector size mismatch");
  IVec r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] + b[k];
  return r;
}

IVec ivec_scale(const IComplex& c, const IVec& v) {
  IVec r(v.size());
  for (size_t k = 0; k < v.size(); ++k) r[k] = c * v[k];
  return r;
}

}  // namespace hsw
