#include "sngca/subspace.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "sngca/errors.hpp"

namespace sngca {

SubspaceEstimate SubspaceEstimate::from_basis(const Matrix& basis) {
  const Index d = basis.rows();
  const Index m = basis.cols();
  if (m > d) throw DimensionMismatch("basis has more columns than rows");
  if (m > 0) {
    const Matrix gram = basis.transpose() * basis;
    if ((gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8)
      throw InvalidSpec("basis columns are not orthonormal");
  }
  SubspaceEstimate est;
  est.basis = basis;
  est.projector = basis * basis.transpose();
  if (m == 0) est.projector = Matrix::Zero(d, d);
  est.m = m;
  return est;
}

SubspaceEstimate SubspaceEstimate::empty(Index d) {
  SubspaceEstimate est;
  est.basis = Matrix::Zero(d, 0);
  est.projector = Matrix::Zero(d, d);
  est.m = 0;
  return est;
}

double subspace_error(const SubspaceEstimate& a, const SubspaceEstimate& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("subspace_error: ambient dimensions differ");
  // Tr[(P_a - P_b)^2] is the squared Frobenius norm for symmetric projectors.
  return (a.projector - b.projector).squaredNorm();
}

double max_subspace_cosine(const Matrix& basis_a, const Matrix& basis_b) {
  if (basis_a.cols() == 0 || basis_b.cols() == 0)
    return (basis_a.cols() == 0 && basis_b.cols() == 0) ? 1.0 : 0.0;
  if (basis_a.rows() != basis_b.rows())
    throw DimensionMismatch("max_subspace_cosine: ambient dimensions differ");
  Eigen::JacobiSVD<Matrix> svd(basis_a.transpose() * basis_b);
  const double sigma = svd.singularValues()(0);
  return std::clamp(sigma, 0.0, 1.0);
}

SubspaceEstimate map_to_normalized(const SubspaceEstimate& truth, const Vector& col_std) {
  if (truth.dim() != col_std.size())
    throw DimensionMismatch("map_to_normalized: col_std length differs from dimension");
  if (truth.m == 0) return SubspaceEstimate::empty(truth.dim());
  Matrix scaled = col_std.cwiseInverse().asDiagonal() * truth.basis;
  Eigen::HouseholderQR<Matrix> qr(scaled);
  Matrix q = qr.householderQ() * Matrix::Identity(truth.dim(), truth.m);
  return SubspaceEstimate::from_basis(q);
}

}  // namespace sngca
