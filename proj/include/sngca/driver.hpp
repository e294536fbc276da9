#pragma once

#include <optional>
#include <vector>

#include "sngca/dataset.hpp"
#include "sngca/ellipsoid.hpp"
#include "sngca/moments.hpp"
#include "sngca/rng.hpp"
#include "sngca/subspace.hpp"
#include "sngca/test_functions.hpp"
#include "sngca/types.hpp"

namespace sngca {

enum class FamilySelection {
  TanhOnly,  // every direction uses the tanh family
  Mixed,     // families alternate by direction index (even: tanh, odd: asymmetric-Gauss)
};

struct SngcaConfig {
  Index d = 0;             // ambient dimension; set by with_defaults
  Index j_probes = 0;    // number of probe vectors xi; default 7d
  Index l_directions = 0;  // test-function directions per probe; default 6d
  int max_iter = 0;        // default ceil(3 ln d)
  double delta_stop = 0.05;
  double c_mvee = 2.0;
  double alpha = 0.05;
  std::optional<Index> m_hint;  // a-priori target dimension
  std::uint64_t seed = 0;
  FamilySelection family = FamilySelection::TanhOnly;
  double family_alpha = 0.5;  // Gaussian damping exponent of the test functions
  SolverOptions solver;

  /* Fill defaults from d and validate; throws ConfigError. */
  static SngcaConfig with_defaults(Index d);
  static SngcaConfig with_defaults(Index d, SngcaConfig base);
};

struct DirectionSet {
  Matrix xis;                  // J x d, unit rows
  std::vector<Matrix> omegas;  // J entries of L x d, unit rows
  Index adapted_probes = 0;    // leading rows of xis drawn from the previous span
  Index adapted_directions = 0;  // leading rows of each omega block drawn likewise
  SplitRng retry{0};           // stream reserved for degenerate-span re-randomization
};

/*
 * Draw probe and test-function directions for iteration k.  For k = 1 (or an
 * empty previous estimate) every vector has i.i.d. U[-1,1] components and is
 * normalized.  Otherwise the first min(kd, J-d) probes and, within each
 * probe, the first min(kd, L-d) directions are normalized U[-1,1]
 * combinations of the previous basis.
 */
DirectionSet sample_directions(int k, const std::optional<SubspaceEstimate>& prev,
                               const SngcaConfig& cfg, SplitRng& rng);

struct IterationRecord {
  int k = 0;
  std::vector<Vector> betas;           // J estimated structural vectors
  std::vector<double> residuals;       // probe-wise solver residuals
  Ellipsoid ellipsoid;
  EllipsoidAxes axes;
  std::vector<bool> axis_flags;        // classify_axes verdicts
  SubspaceEstimate estimate;
  double error_vs_truth = std::numeric_limits<double>::quiet_NaN();
  double cosine_vs_previous = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

/*
 * One structural-adaptation pass: estimate moments per probe, solve the
 * constrained projection for each beta, round the symmetric hull, classify
 * the ellipsoid axes, and assemble the subspace estimate (m = number of
 * flagged axes, or cfg.m_hint when provided).  A DegenerateSpan from the
 * rounding step is remediated once by re-randomizing the directions.
 */
IterationRecord run_iteration(const Dataset& data, const DirectionSet& dirs,
                              const SngcaConfig& cfg);

/*
 * Full driver: iterate run_iteration with structural adaptation, stopping
 * when (a) with truth available, the relative error improvement falls below
 * delta_stop; (b) otherwise, the successive-estimate misalignment
 * 1 - max_subspace_cosine shrinks below delta_stop times its previous value;
 * or (c) max_iter is reached.  data must be normalized (ConfigError
 * otherwise); truth, when given, must live in the same coordinates.
 */
std::vector<IterationRecord> run_sngca(const Dataset& data, const SngcaConfig& cfg,
                                       const std::optional<SubspaceEstimate>& truth = {});

}  // namespace sngca
