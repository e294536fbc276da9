#pragma once

#include <vector>

#include "sngca/dataset.hpp"
#include "sngca/rng.hpp"
#include "sngca/types.hpp"

namespace sngca {

enum class TestKind { DAgostinoK2, AndersonDarling, ShapiroWilk };

struct TestVerdict {
  double statistic = 0.0;  // the tabulated/transformed statistic
  bool reject = false;     // true = non-Gaussian at level alpha
  double alpha = 0.0;      // level the verdict was taken at
  TestKind kind = TestKind::DAgostinoK2;
};

/*
 * D'Agostino K^2 omnibus test: squared sum of the D'Agostino (1970) skewness
 * transform and the Anscombe-Glynn (1983) kurtosis transform, compared with
 * the chi-square(2) upper quantile -2 ln(alpha).  Requires N >= 20.
 */
TestVerdict dagostino_k2(const Vector& samples, double alpha);

/*
 * Anderson-Darling test with estimated mean/variance: the statistic is
 * A^2 * (1 + 0.75/N + 2.25/N^2) and the critical values are the Stephens
 * table for alpha in {0.10, 0.05, 0.025, 0.01, 0.005} (UnsupportedAlpha
 * otherwise).  Requires N >= 8.
 */
TestVerdict anderson_darling(const Vector& samples, double alpha);

/* The five supported Anderson-Darling levels and critical values. */
struct AndersonDarlingRow {
  double alpha;
  double critical_value;
};
const std::vector<AndersonDarlingRow>& anderson_darling_table();

/*
 * Shapiro-Wilk with Royston's coefficient approximation and normalizing
 * transform of ln(1 - W); reject when the transformed statistic exceeds the
 * upper-alpha normal quantile.  Requires 20 <= N <= 1000 (classify_axes
 * subsamples larger inputs before calling).  The verdict's statistic is W.
 */
TestVerdict shapiro_wilk(const Vector& samples, double alpha);

/* Royston order-statistic weights (valid N >= 3) and the raw W statistic. */
Vector shapiro_wilk_weights(Index n);
double shapiro_wilk_statistic(const Vector& samples);

/*
 * Project the samples onto each axis (column) and flag the axis as
 * non-Gaussian when ANY of the three tests rejects at level alpha.  Inputs
 * with N > 1000 are subsampled to 1000 points without replacement using rng
 * (one draw shared across axes, so the call is deterministic given rng).
 */
std::vector<bool> classify_axes(const Dataset& data, const Matrix& axes, double alpha,
                                SplitRng rng = SplitRng(0));

/* Standard normal CDF and (full-precision, iterative) quantile. */
double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace sngca
