#include "sngca/moments.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "sngca/errors.hpp"

namespace sngca {

std::vector<MomentPair> estimate_moments(const Dataset& data, const std::vector<TestFamily>& fams,
                                         const Matrix& omegas) {
  const Index n = data.n();
  const Index d = data.dim();
  const Index num_l = omegas.rows();
  if (n == 0) throw EmptyData("estimate_moments: no samples");
  if (omegas.cols() != d) throw DimensionMismatch("estimate_moments: omega dimension differs");
  if (static_cast<Index>(fams.size()) != num_l)
    throw DimensionMismatch("estimate_moments: one family per direction required");
  for (Index l = 0; l < num_l; ++l)
    if (std::abs(omegas.row(l).norm() - 1.0) > 1e-8)
      throw NonUnitDirection("estimate_moments: omega row is not unit length");

  const Vector sq_norms = data.samples.rowwise().squaredNorm();
  const Matrix u = data.samples * omegas.transpose();  // N x L projections

  std::vector<MomentPair> out(static_cast<std::size_t>(num_l));
  Vector h(n);
  Vector w(n);
  for (Index l = 0; l < num_l; ++l) {
    const TestFamily& fam = fams[static_cast<std::size_t>(l)];
    for (Index i = 0; i < n; ++i)
      detail::value_weight(fam, u(i, l), sq_norms[i], h[i], w[i]);
    MomentPair& mp = out[static_cast<std::size_t>(l)];
    mp.gamma_hat = data.samples.transpose() * h / static_cast<double>(n);
    // Both families satisfy grad f = w(u) * omega - alpha * x * f(x), so the
    // gradient average collapses to a scalar times omega minus alpha * gamma.
    mp.eta_hat = (w.mean()) * omegas.row(l).transpose() - fam.alpha * mp.gamma_hat;
  }
  return out;
}

std::vector<MomentPair> estimate_moments(const Dataset& data, const TestFamily& fam,
                                         const Matrix& omegas) {
  return estimate_moments(data, std::vector<TestFamily>(static_cast<std::size_t>(omegas.rows()), fam),
                          omegas);
}

Vector project_l1_ball(const Vector& v) {
  if (v.lpNorm<1>() <= 1.0) return v;
  const Index n = v.size();
  Vector u = v.cwiseAbs();
  std::sort(u.data(), u.data() + n, std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] > candidate)
      theta = candidate;
    else
      break;
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = std::abs(v[i]) - theta;
    out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

namespace {

/* Largest eigenvalue of a PSD matrix by power iteration (deterministic,
 * permutation-covariant start), slightly inflated for step-size safety. */
double psd_lambda_max(const Matrix& a) {
  const double tr = a.trace();
  if (tr <= 1e-300) return 0.0;
  Vector v = a.diagonal() + a.cwiseAbs().rowwise().sum();
  if (v.norm() <= 0.0) return 0.0;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 48; ++it) {
    Vector av = a * v;
    const double norm = av.norm();
    if (norm <= 1e-300) return 0.0;
    lambda = v.dot(av);
    v = av / norm;
  }
  lambda = std::max(lambda, a.diagonal().maxCoeff());
  return lambda * 1.02;
}

/* 0.5 c'Ac + g0'c, the inner (augmented-Lagrangian) objective up to a constant. */
double quad_obj(const Matrix& a, const Vector& g0, const Vector& c) {
  return 0.5 * c.dot(a * c) + g0.dot(c);
}

/*
 * Minimize the inner objective over the signed face {sign pattern sS on S,
 * sum_i sS_i z_i = 1 when the l1 sphere is active}.  Bordered KKT solve with
 * a tiny ridge; rejects inaccurate solves.
 */
bool face_solve(const Matrix& a, const Vector& g0, const std::vector<Index>& support,
                const Vector& signs, bool active, Vector& z) {
  const Index n = static_cast<Index>(support.size());
  const Index dim = active ? n + 1 : n;
  Matrix k = Matrix::Zero(dim, dim);
  for (Index r = 0; r < n; ++r)
    for (Index col = 0; col < n; ++col) k(r, col) = a(support[r], support[col]);
  const double ridge = 1e-13 * (1.0 + k.topLeftCorner(n, n).trace() / static_cast<double>(n));
  k.topLeftCorner(n, n).diagonal().array() += ridge;
  Vector rhs(dim);
  for (Index r = 0; r < n; ++r) rhs[r] = -g0[support[r]];
  if (active) {
    k.col(n).head(n) = signs;
    k.row(n).head(n) = signs.transpose();
    rhs[n] = 1.0;
  }
  const Vector sol = k.partialPivLu().solve(rhs);
  if (!sol.allFinite()) return false;
  if ((k * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return false;
  z = sol.head(n);
  return true;
}

/*
 * Exact minimizer over the orthant face identified by c, with Lawson-Hanson
 * style coordinate drops when the face solve crosses zero.  Returns false
 * when no valid candidate is found; the caller keeps the current iterate.
 */
bool polish_face(const Matrix& a, const Vector& g0, const Vector& c, Vector& out) {
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  std::vector<Index> support;
  for (Index i = 0; i < c.size(); ++i)
    if (std::abs(c[i]) > 1e-12 * scale) support.push_back(i);
  if (support.empty()) return false;
  const bool active = c.lpNorm<1>() >= 1.0 - 1e-10;

  const Index max_rounds = static_cast<Index>(support.size()) + 2;
  Vector signs(static_cast<Index>(support.size()));
  Vector z_cur(static_cast<Index>(support.size()));
  for (Index i = 0; i < signs.size(); ++i) {
    signs[i] = c[support[static_cast<std::size_t>(i)]] >= 0.0 ? 1.0 : -1.0;
    z_cur[i] = c[support[static_cast<std::size_t>(i)]];
  }

  Vector z;
  for (Index round = 0; round < max_rounds; ++round) {
    if (!face_solve(a, g0, support, signs, active, z)) return false;
    std::vector<Index> viol;
    for (Index i = 0; i < z.size(); ++i)
      if (z[i] * signs[i] < 0.0) viol.push_back(i);
    if (viol.empty()) {
      if (!active && z.lpNorm<1>() > 1.0 + 1e-12) return false;
      out = Vector::Zero(c.size());
      for (Index i = 0; i < z.size(); ++i) out[support[static_cast<std::size_t>(i)]] = z[i];
      return true;
    }
    // Walk from the current face point toward z up to the first zero crossing.
    double alpha = 1.0;
    for (const Index i : viol)
      if (z_cur[i] != z[i]) alpha = std::min(alpha, z_cur[i] / (z_cur[i] - z[i]));
    alpha = std::clamp(alpha, 0.0, 1.0);
    z_cur += alpha * (z - z_cur);

    std::vector<Index> keep;
    for (Index i = 0; i < z_cur.size(); ++i)
      if (std::abs(z_cur[i]) > 1e-14) keep.push_back(i);
    if (keep.size() == support.size()) {
      // Nothing hit zero numerically: force out the smallest violator.
      Index drop = viol.front();
      for (const Index i : viol)
        if (std::abs(z_cur[i]) < std::abs(z_cur[drop])) drop = i;
      keep.clear();
      for (Index i = 0; i < z_cur.size(); ++i)
        if (i != drop) keep.push_back(i);
    }
    if (keep.empty()) return false;
    std::vector<Index> new_support;
    Vector new_signs(static_cast<Index>(keep.size()));
    Vector new_cur(static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      new_support.push_back(support[static_cast<std::size_t>(keep[i])]);
      new_signs[static_cast<Index>(i)] = signs[keep[i]];
      new_cur[static_cast<Index>(i)] = z_cur[keep[i]];
    }
    support = std::move(new_support);
    signs = std::move(new_signs);
    z_cur = std::move(new_cur);
  }
  return false;
}

}  // namespace

ProjectionResult convex_projection(const Vector& xi, const std::vector<MomentPair>& moments,
                                   const SolverOptions& opts) {
  const Index d = xi.size();
  const Index num_l = static_cast<Index>(moments.size());
  if (num_l == 0) throw EmptyData("convex_projection: no moment pairs");
  if (std::abs(xi.norm() - 1.0) > 1e-8)
    throw NonUnitDirection("convex_projection: xi is not unit length");

  Matrix eta(d, num_l);
  Matrix gamma(d, num_l);
  for (Index l = 0; l < num_l; ++l) {
    const MomentPair& mp = moments[static_cast<std::size_t>(l)];
    if (mp.eta_hat.size() != d || mp.gamma_hat.size() != d)
      throw DimensionMismatch("convex_projection: moment dimension differs from xi");
    eta.col(l) = mp.eta_hat;
    gamma.col(l) = mp.gamma_hat;
  }

  // Scale the constraint block once so the penalty parameter is dimensionless;
  // feasibility relative to max_l ||gamma_l||_inf is then absolute on gs.
  const double scale_g = gamma.cwiseAbs().maxCoeff();
  const bool constrained = scale_g > 0.0;
  const Matrix gs = constrained ? Matrix(gamma / scale_g) : Matrix::Zero(d, num_l);

  const Matrix q = eta.transpose() * eta;
  const Matrix p = constrained ? Matrix(gs.transpose() * gs) : Matrix();
  const Vector b0 = eta.transpose() * xi;

  const double q_lip = psd_lambda_max(q);
  const double p_lip = constrained ? psd_lambda_max(p) : 0.0;

  double rho = 0.0;
  double rho_floor = 0.0;
  if (constrained && p_lip > 0.0) rho = rho_floor = std::max(1.0, q_lip) / p_lip;

  Vector lambda_amb = Vector::Zero(d);  // multiplier for the d equality constraints
  Vector c = Vector::Zero(num_l);
  double feas_prev = std::numeric_limits<double>::infinity();
  int total_inner = 0;
  double gap = std::numeric_limits<double>::infinity();
  double feas = 0.0;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const Matrix a = constrained ? Matrix(q + rho * p) : q;
    const Vector g0 = constrained ? Vector(gs.transpose() * lambda_amb - b0) : Vector(-b0);
    const double lip = q_lip + rho * p_lip + 1e-12;
    const double step = 1.0 / lip;
    const double inner_tol = std::max(0.25 * opts.kkt_tol, 1e-4 * std::pow(0.2, outer));

    Vector y = c;
    Vector c_prev = c;
    double t = 1.0;
    int inner = 0;
    bool inner_ok = false;
    for (; inner < opts.max_inner; ++inner) {
      const Vector grad_y = a * y + g0;
      Vector c_new = project_l1_ball(y - step * grad_y);
      const bool restart = (y - c_new).dot(c_new - c_prev) > 0.0;
      if (restart) {
        t = 1.0;
        y = c_new;
      } else {
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = c_new + ((t - 1.0) / t_new) * (c_new - c_prev);
        t = t_new;
      }
      c_prev = c_new;
      c = c_new;
      if (inner % 8 == 7 || inner + 1 == opts.max_inner) {
        // FISTA only has to identify a near-optimal face; an exact solve on
        // that face then clears flat regions where first-order steps stall.
        Vector cand;
        if (polish_face(a, g0, c, cand) && quad_obj(a, g0, cand) <= quad_obj(a, g0, c)) {
          c = cand;
          c_prev = c;
          y = c;
          t = 1.0;
        }
        // min_{||v||_1<=1} grad'(v - c) = -grad'c - ||grad||_inf, so this is a
        // weak-duality bound on the inner suboptimality.
        const Vector g = a * c + g0;
        if (g.dot(c) + g.lpNorm<Eigen::Infinity>() <= inner_tol) {
          inner_ok = true;
          break;
        }
      }
    }
    total_inner += inner + 1;

    const Vector feas_vec = constrained ? Vector(gs * c) : Vector::Zero(d);
    feas = constrained ? feas_vec.lpNorm<Eigen::Infinity>() : 0.0;
    // With lambda+ = lambda + rho gs c the AL gradient at c equals the plain
    // Lagrangian gradient at (c, lambda+); weak duality on the Lagrangian then
    // bounds the objective suboptimality of c by the quantity below.
    const Vector g = a * c + g0;
    gap = g.dot(c) + g.lpNorm<Eigen::Infinity>();
    if (constrained) gap -= (lambda_amb + rho * feas_vec).dot(feas_vec);

    static const bool trace = std::getenv("SNGCA_SOLVER_TRACE") != nullptr;
    if (trace)
      std::fprintf(stderr, "outer %2d: inner %4d rho %.3e gap %.3e feas %.3e q_lip %.3e\n",
                   outer, inner + 1, rho, gap, feas, q_lip);

    const bool feas_ok = !constrained || feas <= opts.feas_tol_rel;
    if (gap <= opts.kkt_tol && feas_ok) break;
    if (outer + 1 == opts.max_outer)
      throw SolverNotConverged(total_inner, feas * scale_g);

    if (constrained) {
      lambda_amb += rho * feas_vec;
      if (feas > opts.feas_tol_rel && feas > 0.25 * feas_prev) {
        // Feasibility stagnates above tolerance: strengthen the penalty.
        rho = std::min(rho * 10.0, 1e12);
      } else if (!inner_ok && feas <= 0.1 * opts.feas_tol_rel && rho > rho_floor) {
        // Feasible but the stiff inner problem cannot be certified: relax the
        // penalty (the multiplier keeps the constraint) to restore
        // conditioning, and let the next pass continue from the warm iterate.
        rho = std::max(rho / 10.0, rho_floor);
      }
      feas_prev = feas;
    }
  }

  ProjectionResult result;
  result.c_hat = c;
  result.beta_hat = eta * c;
  result.residual = (xi - result.beta_hat).norm();
  result.feasibility_gap = (gamma * c).lpNorm<Eigen::Infinity>();
  result.kkt_residual = gap;
  result.iterations = total_inner;
  return result;
}

}  // namespace sngca
