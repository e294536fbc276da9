#pragma once

#include "sngca/types.hpp"

namespace sngca {

/* Sample matrix with one observation per row. */
struct Dataset {
  Matrix samples;      // N x d
  Vector col_std;      // divisors applied by normalize(); empty for raw data
  bool normalized = false;

  Index n() const { return samples.rows(); }
  Index dim() const { return samples.cols(); }
};

/*
 * Recenter every column to mean zero and rescale it to unit standard
 * deviation (unbiased, N-1 denominator).  Throws ZeroVarianceColumn for a
 * constant column and EmptyData for N < 2.  Idempotent up to rounding.
 */
Dataset normalize(const Dataset& data);

}  // namespace sngca
