#pragma once

#include <optional>
#include <vector>

#include "hsw/field.hpp"
#include "hsw/icomplex.hpp"

namespace hsw {

using FVec = std::vector<FieldScalar>;
using FMat = std::vector<FVec>;  // row-major, square unless stated otherwise

FMat fmat_identity(size_t n);
FMat fmat_zero(size_t rows, size_t cols);

FMat fmat_mul(const FMat& a, const FMat& b);
FMat fmat_add(const FMat& a, const FMat& b);
FMat fmat_sub(const FMat& a, const FMat& b);
FMat fmat_scale(const FieldScalar& c, const FMat& a);
FMat fmat_adjoint(const FMat& a);

FVec fmat_apply(const FMat& a, const FVec& v);

FVec fvec_add(const FVec& a, const FVec& b);
FVec fvec_sub(const FVec& a, const FVec& b);
FVec fvec_scale(const FieldScalar& c, const FVec& v);
// Conjugate-linear in the first argument.
FieldScalar fvec_inner(const FVec& u, const FVec& v);
FieldReal fvec_norm2(const FVec& v);

bool fmat_equal(const FMat& a, const FMat& b);
bool fmat_is_hermitian(const FMat& a);

// Returns the first cell (i, j), 1-based, where (A* A - I) is nonzero, or
// nullopt when A is exactly unitary.
std::optional<std::pair<size_t, size_t>> fmat_unitary_defect(const FMat& a);

// Exact inverse via Gauss-Jordan elimination; nullopt when singular.
std::optional<FMat> fmat_inverse(const FMat& a);

// Exact determinant via fraction-free elimination on field scalars.
FieldScalar fmat_det(const FMat& a);

// Exact dimension of the kernel of A (not necessarily square input).
size_t fmat_kernel_dim(const FMat& a);

// Interval image of an exact matrix applied to an interval vector.
IVec fmat_apply_ivec(const FMat& a, const IVec& v);

// Interval enclosure of the whole matrix.
std::vector<std::vector<IComplex>> fmat_enclosure(const FMat& a);

}  // namespace hsw
