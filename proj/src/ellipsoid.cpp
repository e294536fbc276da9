#include "sngca/ellipsoid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sngca/errors.hpp"

namespace sngca {

namespace {

/* Weighted second moment sum_j u_j beta_j beta_j', ridged when singular. */
Matrix weighted_moment(const std::vector<Vector>& betas, const Vector& u, Index d) {
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < betas.size(); ++j)
    m.selfadjointView<Eigen::Lower>().rankUpdate(betas[j], u[static_cast<Index>(j)]);
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return m;
}

Matrix invert_spd_with_ridge(Matrix m) {
  const Index d = m.rows();
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    const double ridge = 1e-10 * m.trace() / static_cast<double>(d);
    m.diagonal().array() += ridge;
    llt.compute(m);
    if (llt.info() != Eigen::Success)
      throw DegenerateSpan("rounding ellipsoid: second-moment matrix is not positive definite");
  }
  return llt.solve(Matrix::Identity(d, d));
}

}  // namespace

Ellipsoid mvee_round(const std::vector<Vector>& betas, double C, const MveeOptions& opts) {
  const Index j_count = static_cast<Index>(betas.size());
  if (j_count == 0) throw EmptyData("mvee_round: no beta vectors");
  const Index d = betas.front().size();
  double max_norm = 0.0;
  for (const Vector& b : betas) {
    if (b.size() != d) throw DimensionMismatch("mvee_round: beta dimensions differ");
    max_norm = std::max(max_norm, b.lpNorm<Eigen::Infinity>());
  }
  if (max_norm <= 1e-12)
    throw DegenerateSpan("rounding ellipsoid: all beta vectors are numerically zero");
  if (C < 1.0) throw ConfigError("mvee_round: C must be >= 1");

  Vector u = Vector::Constant(j_count, 1.0 / static_cast<double>(j_count));
  const Matrix m0 = weighted_moment(betas, u, d);
  {
    // The cloud must span the space; a rank-deficient second moment would
    // otherwise be "repaired" by the ridge into a meaningless ellipsoid.
    Vector eigs;
    Matrix vecs;
    jacobi_eigen(m0, eigs, vecs);
    if (eigs[d - 1] <= 1e-14 * eigs[0])
      throw DegenerateSpan("rounding ellipsoid: beta vectors do not span the space");
  }
  Matrix b_inv = invert_spd_with_ridge(m0);

  // kappa_j = beta_j' M(u)^{-1} beta_j, updated incrementally and refreshed
  // periodically against Sherman-Morrison drift.
  Vector kappa(j_count);
  auto refresh_kappa = [&] {
    for (Index j = 0; j < j_count; ++j)
      kappa[j] = betas[static_cast<std::size_t>(j)].dot(b_inv * betas[static_cast<std::size_t>(j)]);
  };
  refresh_kappa();

  const double threshold = C * static_cast<double>(d);
  int iter = 0;
  double delta = 0.0;
  while (true) {
    Index k_star = 0;
    delta = kappa.maxCoeff(&k_star);
    if (opts.delta_trace) opts.delta_trace->push_back(delta);
    if (delta <= threshold) break;
    if (iter >= opts.max_iter)
      throw MaxIterations("rounding ellipsoid: iteration cap reached");

    // Optimal barycentric step for the symmetric (central) problem; the
    // Sherman-Morrison denominator 1 - t + t*delta equals delta/d at this t.
    const double t = (delta - d) / (d * (delta - 1.0));
    if (opts.step_trace) opts.step_trace->push_back(t);
    const Vector& bk = betas[static_cast<std::size_t>(k_star)];
    const Vector x = b_inv * bk;
    const double denom = 1.0 - t + t * delta;
    b_inv.noalias() -= (t / denom) * (x * x.transpose());
    b_inv /= (1.0 - t);
    u *= (1.0 - t);
    u[k_star] += t;
    ++iter;

    if (iter % 64 == 0) {
      b_inv = invert_spd_with_ridge(weighted_moment(betas, u, d));
      refresh_kappa();
    } else {
      // kappa_j' = (kappa_j - (t/denom) (beta_j' x)^2) / (1 - t)
      for (Index j = 0; j < j_count; ++j) {
        const double dot = betas[static_cast<std::size_t>(j)].dot(x);
        kappa[j] = (kappa[j] - (t / denom) * dot * dot) / (1.0 - t);
      }
    }
  }

  Ellipsoid result;
  // Normalize so the covering ellipsoid is {x : x'Bx <= 1}; the John
  // inscribed ellipsoid is recovered as delta_star * B.
  result.B = b_inv / delta;
  result.delta_star = delta;
  result.iterations = iter;
  return result;
}

void jacobi_eigen(const Matrix& a, Vector& eigenvalues, Matrix& eigenvectors) {
  const Index n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("jacobi_eigen: matrix is not square");
  Matrix m = 0.5 * (a + a.transpose());
  Matrix v = Matrix::Identity(n, n);
  // Relative sweep tolerance: the rotation sequence is scale-free, and an
  // absolute floor would leave tiny matrices undiagonalized.
  const double norm = m.norm();
  const double scale = norm > 0.0 ? norm : 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) s += 2.0 * m(p, q) * m(p, q);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 64 && off_norm() > 1e-12 * scale; ++sweep) {
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
        // Smaller-angle root of t^2 + 2 tau t - 1 = 0 for stability.
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        const double app = m(p, p);
        const double aqq = m(q, q);
        m(p, p) = app - t * apq;
        m(q, q) = aqq + t * apq;
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (Index i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = m(i, p);
          const double aiq = m(i, q);
          m(i, p) = cs * aip - sn * aiq;
          m(p, i) = m(i, p);
          m(i, q) = sn * aip + cs * aiq;
          m(q, i) = m(i, q);
        }
        for (Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = cs * vip - sn * viq;
          v(i, q) = sn * vip + cs * viq;
        }
      }
    }
  }

  // Sort descending; stable so equal eigenvalues keep rotation order.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Vector diag = m.diagonal();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return diag[i] > diag[j]; });
  eigenvalues.resize(n);
  eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    eigenvalues[k] = diag[order[static_cast<std::size_t>(k)]];
    Vector col = v.col(order[static_cast<std::size_t>(k)]);
    // Canonical sign: the largest-magnitude component is positive.
    Index max_idx = 0;
    col.cwiseAbs().maxCoeff(&max_idx);
    if (col[max_idx] < 0.0) col = -col;
    eigenvectors.col(k) = col;
  }
}

EllipsoidAxes principal_axes(const Ellipsoid& ellipsoid) {
  const Index d = ellipsoid.B.rows();
  if (ellipsoid.B.cols() != d) throw DimensionMismatch("principal_axes: B is not square");
  Eigen::LLT<Matrix> llt(ellipsoid.B);
  if (llt.info() != Eigen::Success)
    throw NumericalError("principal_axes: B is not positive definite");
  const Matrix b_inverse = llt.solve(Matrix::Identity(d, d));
  EllipsoidAxes axes;
  jacobi_eigen(b_inverse, axes.eigenvalues, axes.axes);
  return axes;
}

SubspaceEstimate build_projector(const EllipsoidAxes& axes, Index m) {
  const Index d = axes.axes.rows();
  if (m < 1 || m > d) throw InvalidRank("build_projector: m out of range");
  return SubspaceEstimate::from_basis(axes.axes.leftCols(m));
}

}  // namespace sngca
