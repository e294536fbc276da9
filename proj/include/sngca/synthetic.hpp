#pragma once

#include <optional>
#include <string>

#include "sngca/dataset.hpp"
#include "sngca/subspace.hpp"
#include "sngca/types.hpp"

namespace sngca {

/*
 * Benchmark models.  Each places a 2-dimensional non-Gaussian law (unit
 * variance per coordinate) in the first two coordinates, fills the remaining
 * d-2 coordinates with independent Gaussian noise, then applies a seeded
 * random rotation of R^d to samples and truth alike.
 *
 *   A  independent two-point Gaussian mixtures 0.5 N(-3,1) + 0.5 N(3,1)
 *   B  isotropic density ~ exp(-||x||)          (radius ~ Gamma(2,1))
 *   C  uniform on the unit disk
 *   D  Laplace(1) paired with a dependent uniform U(c, c+1),
 *      c = 0 if |x_laplace| <= ln 2 else -1
 *   E  isotropic 2-d Cauchy, radius truncated at 20*lambda, rescaled to
 *      unit empirical variance
 */
enum class Model { A, B, C, D, E };

struct ModelSpec {
  Model model = Model::C;
  Index d = 10;
  Index n = 1000;
  std::uint64_t seed = 0;
  /*
   * When set, the Gaussian coordinates get standard deviations in geometric
   * progression 10^{-r}, 10^{-r + 2r/(d-3)}, ..., 10^{r} instead of 1.
   */
  std::optional<double> noise_r;
};

struct GeneratedData {
  Dataset data;            // raw (not normalized) rotated samples
  SubspaceEstimate truth;  // rotated non-Gaussian subspace (m = 2)
  Matrix rotation;         // the applied rotation; pre-rotation rows = samples * rotation
  std::string note;        // non-empty for model E (truncation/rescaling flag)
};

/* Draw N samples of the model; deterministic given spec.seed. */
GeneratedData generate(const ModelSpec& spec);

Model model_from_string(const std::string& name);
std::string model_to_string(Model model);

}  // namespace sngca
