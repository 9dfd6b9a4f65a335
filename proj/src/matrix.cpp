#include "hsw/matrix.hpp"

#include "hsw/errors.hpp"

namespace hsw {

namespace {
void check_square(const FMat& a, const char* who) {
  if (a.empty()) throw InternalError(std::string(who) + ": empty matrix");
  for (const auto& row : a)
    if (row.size() != a.size())
      throw InternalError(std::string(who) + ": not square");
}
}  // namespace

FMat fmat_identity(size_t n) {
  FMat m(n, FVec(n));
  for (size_t i = 0; i < n; ++i) m[i][i] = FieldScalar::one();
  return m;
}

FMat fmat_zero(size_t rows, size_t cols) { return FMat(rows, FVec(cols)); }

FMat fmat_mul(const FMat& a, const FMat& b) {
  size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  for (const auto& row : a)
    if (row.size() != k) throw InternalError("fmat_mul: shape mismatch");
  FMat r(n, FVec(m));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      FieldScalar acc;
      for (size_t t = 0; t < k; ++t) acc = acc + a[i][t] * b[t][j];
      r[i][j] = acc;
    }
  return r;
}

FMat fmat_add(const FMat& a, const FMat& b) {
  FMat r = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

FMat fmat_sub(const FMat& a, const FMat& b) {
  FMat r = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

FMat fmat_scale(const FieldScalar& c, const FMat& a) {
  FMat r = a;
  for (auto& row : r)
    for (auto& z : row) z = c * z;
  return r;
}

FMat fmat_adjoint(const FMat& a) {
  size_t n = a.size(), m = a.empty() ? 0 : a[0].size();
  FMat r(m, FVec(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) r[j][i] = a[i][j].conj();
  return r;
}

FVec fmat_apply(const FMat& a, const FVec& v) {
  if (!a.empty() && a[0].size() != v.size())
    throw InternalError("fmat_apply: shape mismatch");
  FVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    FieldScalar acc;
    for (size_t j = 0; j < v.size(); ++j) acc = acc + a[i][j] * v[j];
    r[i] = acc;
  }
  return r;
}

FVec fvec_add(const FVec& a, const FVec& b) {
  if (a.size() != b.size()) throw InternalError("fvec_add: size mismatch");
  FVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

FVec fvec_sub(const FVec& a, const FVec& b) {
  if (a.size() != b.size()) throw InternalError("fvec_sub: size mismatch");
  FVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

FVec fvec_scale(const FieldScalar& c, const FVec& v) {
  FVec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = c * v[i];
  return r;
}

FieldScalar fvec_inner(const FVec& u, const FVec& v) {
  if (u.size() != v.size()) throw InternalError("fvec_inner: size mismatch");
  FieldScalar acc;
  for (size_t i = 0; i < u.size(); ++i) acc = acc + u[i].conj() * v[i];
  return acc;
}

FieldReal fvec_norm2(const FVec& v) {
  FieldReal acc;
  for (const auto& z : v) acc = acc + z.abs2();
  return acc;
}

bool fmat_equal(const FMat& a, const FMat& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    for (size_t j = 0; j < a[i].size(); ++j)
      if (a[i][j] != b[i][j]) return false;
  }
  return true;
}

bool fmat_is_hermitian(const FMat& a) {
  check_square(a, "fmat_is_hermitian");
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a.size(); ++j)
      if (a[i][j] != a[j][i].conj()) return false;
  return true;
}

std::optional<std::pair<size_t, size_t>> fmat_unitary_defect(const FMat& a) {
  check_square(a, "fmat_unitary_defect");
  FMat g = fmat_mul(fmat_adjoint(a), a);
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = 0; j < g.size(); ++j) {
      FieldScalar want = i == j ? FieldScalar::one() : FieldScalar::zero();
      if (g[i][j] != want) return std::make_pair(i + 1, j + 1);
    }
  return std::nullopt;
}

std::optional<FMat> fmat_inverse(const FMat& a) {
  check_square(a, "fmat_inverse");
  size_t n = a.size();
  FMat work = a;
  FMat inv = fmat_identity(n);
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && work[pivot][col].is_zero()) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(work[pivot], work[col]);
    std::swap(inv[pivot], inv[col]);
    FieldScalar inv_p = work[col][col].inverse();
    for (size_t j = 0; j < n; ++j) {
      work[col][j] = inv_p * work[col][j];
      inv[col][j] = inv_p * inv[col][j];
    }
    for (size_t row = 0; row < n; ++row) {
      if (row == col || work[row][col].is_zero()) continue;
      FieldScalar f = work[row][col];
      for (size_t j = 0; j < n; ++j) {
        work[row][j] = work[row][j] - f * work[col][j];
        inv[row][j] = inv[row][j] - f * inv[col][j];
      }
    }
  }
  return inv;
}

FieldScalar fmat_det(const FMat& a) {
  check_square(a, "fmat_det");
  size_t n = a.size();
  FMat work = a;
  FieldScalar det = FieldScalar::one();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && work[pivot][col].is_zero()) ++pivot;
    if (pivot == n) return FieldScalar::zero();
    if (pivot != col) {
      std::swap(work[pivot], work[col]);
      det = -det;
    }
    det = det * work[col][col];
    FieldScalar inv_p = work[col][col].inverse();
    for (size_t row = col + 1; row < n; ++row) {
      if (work[row][col].is_zero()) continue;
      FieldScalar f = work[row][col] * inv_p;
      for (size_t j = col; j < n; ++j)
        work[row][j] = work[row][j] - f * work[col][j];
    }
  }
  return det;
}

size_t fmat_kernel_dim(const FMat& a) {
  if (a.empty()) return 0;
  size_t rows = a.size(), cols = a[0].size();
  FMat work = a;
  size_t rank = 0;
  for (size_t col = 0; col < cols && rank < rows; ++col) {
    size_t pivot = rank;
    while (pivot < rows && work[pivot][col].is_zero()) ++pivot;
    if (pivot == rows) continue;
    std::swap(work[pivot], work[rank]);
    FieldScalar inv_p = work[rank][col].inverse();
    for (size_t j = col; j < cols; ++j) work[rank][j] = inv_p * work[rank][j];
    for (size_t row = 0; row < rows; ++row) {
      if (row == rank || work[row][col].is_zero()) continue;
      FieldScalar f = work[row][col];
      for (size_t j = col; j < cols; ++j)
        work[row][j] = work[row][j] - f * work[rank][j];
    }
    ++rank;
  }
  return cols - rank;
}

IVec fmat_apply_ivec(const FMat& a, const IVec& v) {
  if (!a.empty() && a[0].size() != v.size())
    throw InternalError("fmat_apply_ivec: shape mismatch");
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    IComplex acc;
    for (size_t j = 0; j < v.size(); ++j)
      acc = acc + field_to_icomplex(a[i][j]) * v[j];
    r[i] = acc;
  }
  return r;
}

std::vector<std::vector<IComplex>> fmat_enclosure(const FMat& a) {
  std::vector<std::vector<IComplex>> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    r[i].resize(a[i].size());
    for (size_t j = 0; j < a[i].size(); ++j)
      r[i][j] = field_to_icomplex(a[i][j]);
  }
  return r;
}

}  // namespace hsw
