#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsw/interval.hpp"
#include "hsw/matrix.hpp"

namespace hsw {

enum class Verdict3 { Yes, No, Undecided };

std::string verdict3_name(Verdict3 v);

struct HermEigRange {
  Interval lambda_min;
  Interval lambda_max;
};

// Certified enclosure of the extreme eigenvalues of an exactly Hermitian
// matrix. Floating-point Jacobi sweeps propose eigenvectors; certification is
// exact: the proposed basis is rationalized, the matrix is conjugated exactly,
// Gershgorin discs bound the spectrum from outside and exact Rayleigh
// quotients witness it from inside. Throws BudgetError when the requested
// width is unreachable.
HermEigRange hermitian_eig_range(const FMat& h, const Rat& eps);

// Certified enclosure of the operator norm (largest singular value).
Interval op_norm(const FMat& a, const Rat& eps);

// Exact squared operator norm for the common case where A* A is exactly
// diagonal; nullopt otherwise.
std::optional<FieldReal> op_norm2_exact(const FMat& a);

// One cluster of unitary eigenvalues: a disc in the complex plane certified
// to contain exactly `multiplicity` eigenvalues, plus an enclosure of the
// corresponding arc angle(s) in [0, 2pi) (the interval may dip below 0 when
// the cluster straddles angle 0; callers treat angles mod 2pi).
struct EigCluster {
  FieldScalar center;  // exact representative disc center
  Rat radius;          // certified disc radius (0 for exact spectra)
  size_t multiplicity;
  Interval angle;
};

// Certified eigenvalue clusters of an exactly unitary matrix, sorted by
// angle. Clusters closer than eps (chord distance) are merged, so reported
// multiplicities are exact for spectra whose distinct eigenvalues are
// separated by more than eps.
std::vector<EigCluster> unitary_eigs(const FMat& u, const Rat& eps);

struct SpectraResult {
  Verdict3 verdict;
  std::string reason;
};

// Do two unitaries have identical spectra with multiplicity? "Yes" needs an
// exact argument (exact diagonal spectra, or kernel ranks against a shared
// candidate set); "No" needs a certified separation; otherwise undecided.
SpectraResult spectra_equivalent(const FMat& a, const FMat& b, const Rat& eps);

}  // namespace hsw
