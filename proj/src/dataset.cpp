#include "sngca/dataset.hpp"

#include <cmath>

#include "sngca/errors.hpp"

namespace sngca {

Dataset normalize(const Dataset& data) {
  const Index n = data.n();
  const Index d = data.dim();
  if (n < 2) throw EmptyData("normalize needs at least 2 samples");

  Dataset out;
  out.samples.resize(n, d);
  out.col_std.resize(d);
  for (Index j = 0; j < d; ++j) {
    const double mean = data.samples.col(j).mean();
    const Vector centered = data.samples.col(j).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
    // A constant column (up to accumulated rounding of its own mean) carries
    // no direction information and would blow up under rescaling.
    if (sd <= 1e-12 * (1.0 + std::abs(mean))) throw ZeroVarianceColumn(static_cast<int>(j));
    out.samples.col(j) = centered / sd;
    out.col_std[j] = sd;
  }
  out.normalized = true;
  return out;
}

}  // namespace sngca
