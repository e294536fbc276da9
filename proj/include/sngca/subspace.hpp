#pragma once

#include "sngca/types.hpp"

namespace sngca {

/*
 * An m-dimensional linear subspace of R^d carried as an orthonormal basis
 * together with the orthogonal projector basis * basis^T.  m = 0 (empty
 * estimate, zero projector) is a valid state.
 */
struct SubspaceEstimate {
  Matrix basis;      // d x m, orthonormal columns
  Matrix projector;  // d x d, symmetric, idempotent
  Index m = 0;

  Index dim() const { return projector.rows(); }

  /* Build from a basis; throws InvalidSpec unless columns are orthonormal. */
  static SubspaceEstimate from_basis(const Matrix& basis);

  /* The empty (rank-0) estimate in R^d. */
  static SubspaceEstimate empty(Index d);
};

/*
 * Squared projector distance Tr[(P_a - P_b)^2]; equals 2(m - Tr[P_a P_b])
 * when both estimates have rank m.  Throws DimensionMismatch when the
 * ambient dimensions differ.
 */
double subspace_error(const SubspaceEstimate& a, const SubspaceEstimate& b);

/*
 * Largest singular value of V_a^T V_b for orthonormal bases: the cosine of
 * the smallest principal angle, clamped to [0, 1].  Either argument may have
 * zero columns; the cosine is then 1 if both are empty and 0 otherwise.
 */
double max_subspace_cosine(const Matrix& basis_a, const Matrix& basis_b);

/*
 * Express a raw-coordinate subspace in normalized coordinates: scale the
 * basis rows by 1/col_std and re-orthonormalize.  Used to compare estimates
 * produced on normalized data against ground truth stated in raw coordinates.
 */
SubspaceEstimate map_to_normalized(const SubspaceEstimate& truth, const Vector& col_std);

}  // namespace sngca
