#pragma once

#include <vector>

#include "sngca/dataset.hpp"
#include "sngca/test_functions.hpp"
#include "sngca/types.hpp"

namespace sngca {

/* Empirical moments of one test function: gamma = mean x h(x), eta = mean grad h(x). */
struct MomentPair {
  Vector gamma_hat;  // d
  Vector eta_hat;    // d
};

/*
 * Estimate (gamma_hat_l, eta_hat_l) for each row l of omegas (L x d, unit
 * rows).  The per-l family allows alternating families; the single-family
 * overload applies one family to every direction.
 */
std::vector<MomentPair> estimate_moments(const Dataset& data, const std::vector<TestFamily>& fams,
                                         const Matrix& omegas);
std::vector<MomentPair> estimate_moments(const Dataset& data, const TestFamily& fam,
                                         const Matrix& omegas);

struct SolverOptions {
  double kkt_tol = 1e-8;        // Lagrangian duality gap (bound on objective suboptimality)
  double feas_tol_rel = 1e-7;   // feasibility gap, relative to max_l ||gamma_l||_inf
  int max_outer = 50;           // multiplier updates
  int max_inner = 2000;         // accelerated projected-gradient steps per outer pass
};

struct ProjectionResult {
  Vector c_hat;            // L, ||c||_1 <= 1
  Vector beta_hat;         // d, = sum_l c_l eta_l
  double residual = 0.0;   // ||xi - sum_l c_l eta_l||_2
  double feasibility_gap = 0.0;  // ||sum_l c_l gamma_l||_inf
  double kkt_residual = 0.0;     // duality-gap certificate at the returned c
  int iterations = 0;      // total inner steps
};

/*
 * Solve  min_c ||xi - sum_l c_l eta_l||_2  subject to  ||c||_1 <= 1 and
 * sum_l c_l gamma_l = 0, by an augmented Lagrangian on the equality
 * constraint with accelerated projected-gradient inner solves over the
 * l1 ball plus exact active-face refinement.  Convergence is certified by
 * a weak-duality gap on the Lagrangian; throws SolverNotConverged when the
 * iteration caps are exhausted before gap and feasibility tolerances hold.
 */
ProjectionResult convex_projection(const Vector& xi, const std::vector<MomentPair>& moments,
                                   const SolverOptions& opts = {});

/* Euclidean projection onto the unit l1 ball (exact, O(L log L)). */
Vector project_l1_ball(const Vector& v);

}  // namespace sngca
