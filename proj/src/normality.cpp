#include "sngca/normality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sngca/errors.hpp"

namespace sngca {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must lie in (0,1)");
  // Safeguarded Newton on Phi(z) - p = 0; no rational-approximation tables,
  // full double precision in a handful of steps from a logistic-style start.
  double lo = -40.0, hi = 40.0;
  double z = (p > 0.5 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, -2.0 * std::log(2.0 * std::min(p, 1.0 - p))));
  static const double inv_sqrt_2pi = 0.3989422804014327;
  for (int it = 0; it < 80; ++it) {
    const double err = normal_cdf(z) - p;
    if (err > 0.0)
      hi = std::min(hi, z);
    else
      lo = std::max(lo, z);
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * z * z);
    double z_new = (pdf > 0.0) ? z - err / pdf : 0.5 * (lo + hi);
    if (!(z_new > lo && z_new < hi)) z_new = 0.5 * (lo + hi);
    if (std::abs(z_new - z) <= 1e-15 * (1.0 + std::abs(z))) return z_new;
    z = z_new;
  }
  return z;
}

namespace {

void central_moments(const Vector& x, double& m2, double& m3, double& m4) {
  const double n = static_cast<double>(x.size());
  const double mean = x.mean();
  m2 = m3 = m4 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double dlt = x[i] - mean;
    const double d2 = dlt * dlt;
    m2 += d2;
    m3 += d2 * dlt;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
}

/* D'Agostino (1970) normalizing transform of sample skewness. */
double skewness_z(double sqrt_b1, double n) {
  const double y = sqrt_b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(std::log(std::sqrt(w2)));
  const double a = std::sqrt(2.0 / (w2 - 1.0));
  return delta * std::asinh(y / a);
}

/* Anscombe-Glynn (1983) normalizing transform of sample kurtosis. */
double kurtosis_z(double b2, double n) {
  const double eb2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double vb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - eb2) / std::sqrt(vb2);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  const double ratio = (1.0 - 2.0 / a) / std::abs(denom);
  const double term2 = (denom < 0.0 ? -1.0 : 1.0) * std::cbrt(ratio);
  return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

}  // namespace

TestVerdict dagostino_k2(const Vector& samples, double alpha) {
  if (samples.size() < 20) throw TooFewSamples("dagostino_k2 requires N >= 20");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UnsupportedAlpha("alpha must lie in (0,1)");
  const double n = static_cast<double>(samples.size());
  double m2, m3, m4;
  central_moments(samples, m2, m3, m4);
  if (m2 <= 0.0) throw NumericalError("dagostino_k2: zero variance");
  const double sqrt_b1 = m3 / std::pow(m2, 1.5);
  const double b2 = m4 / (m2 * m2);
  const double z1 = skewness_z(sqrt_b1, n);
  const double z2 = kurtosis_z(b2, n);
  TestVerdict v;
  v.statistic = z1 * z1 + z2 * z2;
  // chi-square(2) upper quantile in closed form.
  v.reject = v.statistic > -2.0 * std::log(alpha);
  v.alpha = alpha;
  v.kind = TestKind::DAgostinoK2;
  return v;
}

const std::vector<AndersonDarlingRow>& anderson_darling_table() {
  static const std::vector<AndersonDarlingRow> table = {
      {0.10, 0.631}, {0.05, 0.752}, {0.025, 0.873}, {0.01, 1.035}, {0.005, 1.159}};
  return table;
}

TestVerdict anderson_darling(const Vector& samples, double alpha) {
  if (samples.size() < 8) throw TooFewSamples("anderson_darling requires N >= 8");
  double critical = -1.0;
  for (const AndersonDarlingRow& row : anderson_darling_table())
    if (std::abs(row.alpha - alpha) < 1e-12) critical = row.critical_value;
  if (critical < 0.0)
    throw UnsupportedAlpha("anderson_darling: alpha must be one of the tabulated levels");

  const Index n = samples.size();
  const double nn = static_cast<double>(n);
  Vector x = samples;
  std::sort(x.data(), x.data() + n);
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().sum() / (nn - 1.0));
  if (sd <= 0.0) throw NumericalError("anderson_darling: zero variance");

  double a2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double lo = normal_cdf((x[i] - mean) / sd);
    const double hi = normal_cdf((x[n - 1 - i] - mean) / sd);
    const double term = std::log(lo) + std::log1p(-hi);
    a2 += (2.0 * static_cast<double>(i) + 1.0) * term;
  }
  a2 = -nn - a2 / nn;

  TestVerdict v;
  v.statistic = a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
  v.reject = v.statistic > critical;
  v.alpha = alpha;
  v.kind = TestKind::AndersonDarling;
  return v;
}

Vector shapiro_wilk_weights(Index n) {
  if (n < 3) throw TooFewSamples("shapiro_wilk_weights requires N >= 3");
  // Royston's approximation: Blom scores m_i, normalized, with polynomial
  // corrections for the one/two most extreme weights (AS R94).
  Vector m(n);
  const double nn = static_cast<double>(n);
  for (Index i = 0; i < n; ++i)
    m[i] = normal_quantile((static_cast<double>(i) + 1.0 - 0.375) / (nn + 0.25));
  const double ssm = m.squaredNorm();
  const double rsn = 1.0 / std::sqrt(nn);
  Vector a = m / std::sqrt(ssm);
  if (n == 3) {
    a[0] = -std::numbers::sqrt2 / 2.0;
    a[1] = 0.0;
    a[2] = std::numbers::sqrt2 / 2.0;
    return a;
  }
  const double a_n =
      a[n - 1] + rsn * (0.221157 + rsn * (-0.147981 + rsn * (-2.071190 + rsn * (4.434685 + rsn * -2.706056))));
  if (n <= 5) {
    const double phi = (ssm - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
    a = m / std::sqrt(phi);
    a[n - 1] = a_n;
    a[0] = -a_n;
  } else {
    const double a_n1 =
        a[n - 2] + rsn * (0.042981 + rsn * (-0.293762 + rsn * (-1.752461 + rsn * (5.682633 + rsn * -3.582633))));
    const double phi = (ssm - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                       (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
    a = m / std::sqrt(phi);
    a[n - 1] = a_n;
    a[n - 2] = a_n1;
    a[0] = -a_n;
    a[1] = -a_n1;
  }
  return a;
}

double shapiro_wilk_statistic(const Vector& samples) {
  const Index n = samples.size();
  if (n < 3) throw TooFewSamples("shapiro_wilk_statistic requires N >= 3");
  Vector x = samples;
  std::sort(x.data(), x.data() + n);
  const Vector a = shapiro_wilk_weights(n);
  const double mean = x.mean();
  const double ss = (x.array() - mean).square().sum();
  if (ss <= 0.0) throw NumericalError("shapiro_wilk: zero variance");
  const double b = a.dot(x);
  return b * b / ss;
}

TestVerdict shapiro_wilk(const Vector& samples, double alpha) {
  const Index n = samples.size();
  if (n < 20) throw TooFewSamples("shapiro_wilk requires N >= 20");
  if (n > 1000) throw TooManySamples("shapiro_wilk requires N <= 1000");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UnsupportedAlpha("alpha must lie in (0,1)");
  const double w = shapiro_wilk_statistic(samples);
  // Royston's normalization of ln(1 - W) for n >= 12.
  const double lnn = std::log(static_cast<double>(n));
  const double mu = -1.5861 + lnn * (-0.31082 + lnn * (-0.083751 + lnn * 0.0038915));
  const double sigma = std::exp(-0.4803 + lnn * (-0.082676 + lnn * 0.0030302));
  const double z = (std::log1p(-w) - mu) / sigma;
  TestVerdict v;
  v.statistic = w;
  v.reject = z > normal_quantile(1.0 - alpha);
  v.alpha = alpha;
  v.kind = TestKind::ShapiroWilk;
  return v;
}

std::vector<bool> classify_axes(const Dataset& data, const Matrix& axes, double alpha,
                                SplitRng rng) {
  const Index n = data.n();
  const Index d = data.dim();
  if (axes.rows() != d) throw DimensionMismatch("classify_axes: axis dimension differs from data");
  if (n < 20) throw TooFewSamples("classify_axes requires N >= 20");

  // One shared subsample (without replacement) keeps the call deterministic
  // given rng and comparable across axes.
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Index use = n;
  if (n > 1000) {
    use = 1000;
    for (Index i = 0; i < use; ++i) {
      const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<bool> flags(static_cast<std::size_t>(axes.cols()), false);
  Vector proj(use);
  for (Index k = 0; k < axes.cols(); ++k) {
    for (Index i = 0; i < use; ++i)
      proj[i] = data.samples.row(idx[static_cast<std::size_t>(i)]).dot(axes.col(k));
    const bool reject = dagostino_k2(proj, alpha).reject ||
                        anderson_darling(proj, alpha).reject ||
                        shapiro_wilk(proj, alpha).reject;
    flags[static_cast<std::size_t>(k)] = reject;
  }
  return flags;
}

}  // namespace sngca
