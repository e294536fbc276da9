#pragma once

#include <vector>

#include "sngca/subspace.hpp"
#include "sngca/types.hpp"

namespace sngca {

/*
 * Rounding ellipsoid of the symmetric hull of the beta vectors.  B is
 * normalized so the covering ellipsoid is {x : x'Bx <= 1} (every input
 * satisfies beta'B beta <= 1).  delta_star records the Khachiyan termination
 * value max_j beta_j' M(u)^{-1} beta_j, which lies in [d, C*d]; the John
 * inscribed ellipsoid is {x : x' (delta_star * B) x <= 1}.
 */
struct Ellipsoid {
  Matrix B;            // d x d, SPD
  double delta_star = 0.0;
  int iterations = 0;
};

struct MveeOptions {
  int max_iter = 100000;
  std::vector<double>* delta_trace = nullptr;  // optional per-iteration delta sink
  std::vector<double>* step_trace = nullptr;   // optional per-iteration t_i sink
};

/*
 * Khachiyan barycentric coordinate ascent for the minimum-volume ellipsoid
 * of {±beta_j}, run until max_j beta_j' M(u)^{-1} beta_j <= C * d.  Throws
 * DegenerateSpan when every beta is (numerically) zero and MaxIterations
 * when the cap is reached.  A rank-deficient second-moment start is handled
 * with a small ridge.
 */
Ellipsoid mvee_round(const std::vector<Vector>& betas, double C, const MveeOptions& opts = {});

/* Eigen-decomposition of B^{-1}: eigenvalues descending, orthonormal axes. */
struct EllipsoidAxes {
  Vector eigenvalues;  // d, descending
  Matrix axes;         // d x d, column k pairs with eigenvalues[k]
};

EllipsoidAxes principal_axes(const Ellipsoid& ellipsoid);

/* Projector onto the span of the top-m axes; throws InvalidRank unless 1 <= m <= d. */
SubspaceEstimate build_projector(const EllipsoidAxes& axes, Index m);

/*
 * Cyclic Jacobi eigensolver for symmetric matrices: rotations are applied in
 * sweeps until the off-diagonal Frobenius norm falls below 1e-12 * ||A||_F.
 * Returns eigenvalues (descending) and orthonormal eigenvectors.
 */
void jacobi_eigen(const Matrix& a, Vector& eigenvalues, Matrix& eigenvectors);

}  // namespace sngca
