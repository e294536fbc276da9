#include "sngca/synthetic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "sngca/errors.hpp"
#include "sngca/rng.hpp"

namespace sngca {

namespace {

constexpr std::uint64_t kRotationTag = 0x524f54;  // stream tags ("ROT", "SMP")
constexpr std::uint64_t kSampleTag = 0x534d50;

/* Haar-distributed rotation: QR of a Gaussian matrix, R-diagonal sign fix. */
Matrix random_rotation(Index d, SplitRng& rng) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  // Make it a proper rotation (det +1); reflections would be fine for the
  // statistics but a fixed convention keeps fixtures stable.
  if (q.determinant() < 0.0) q.col(d - 1) = -q.col(d - 1);
  return q;
}

double sample_laplace(SplitRng& rng) {
  const double u = rng.uniform01() - 0.5;
  const double mag = -std::log1p(-2.0 * std::abs(u));
  return u >= 0.0 ? mag : -mag;
}

/* Fill the two non-Gaussian coordinates (unit variance per coordinate). */
void fill_non_gaussian(Model model, Matrix& x, SplitRng& rng, std::string& note) {
  const Index n = x.rows();
  switch (model) {
    case Model::A: {
      // Independent two-point Gaussian mixtures; raw variance 9 + 1 = 10.
      const double scale = 1.0 / std::sqrt(10.0);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 2; ++j) {
          const double center = rng.uniform01() < 0.5 ? -3.0 : 3.0;
          x(i, j) = scale * (center + rng.normal());
        }
      break;
    }
    case Model::B: {
      // Isotropic density ~ exp(-r): radius Gamma(2,1) = sum of two
      // exponentials, uniform angle; E[r^2] = 6 so coordinate variance is 3.
      const double scale = 1.0 / std::sqrt(3.0);
      for (Index i = 0; i < n; ++i) {
        const double r = -std::log1p(-rng.uniform01()) - std::log1p(-rng.uniform01());
        const double phi = 2.0 * M_PI * rng.uniform01();
        x(i, 0) = scale * r * std::cos(phi);
        x(i, 1) = scale * r * std::sin(phi);
      }
      break;
    }
    case Model::C: {
      // Uniform on the unit disk by rejection; coordinate variance 1/4.
      for (Index i = 0; i < n; ++i) {
        double a, b;
        do {
          a = rng.uniform(-1.0, 1.0);
          b = rng.uniform(-1.0, 1.0);
        } while (a * a + b * b > 1.0);
        x(i, 0) = 2.0 * a;
        x(i, 1) = 2.0 * b;
      }
      break;
    }
    case Model::D: {
      // Laplace(1) (variance 2) and a dependent uniform U(c, c+1) with
      // c = 0 when |laplace| <= ln 2, else -1; marginally U(-1,1), variance 1/3.
      const double lap_scale = 1.0 / std::sqrt(2.0);
      const double uni_scale = std::sqrt(3.0);
      for (Index i = 0; i < n; ++i) {
        const double lap = sample_laplace(rng);
        const double c = std::abs(lap) <= std::numbers::ln2 ? 0.0 : -1.0;
        x(i, 0) = lap_scale * lap;
        x(i, 1) = uni_scale * (c + rng.uniform01());
      }
      break;
    }
    case Model::E: {
      // Isotropic 2-d Cauchy radial law r/(1+r^2)^{3/2} truncated at r = 20,
      // sampled by inverting the truncated CDF, then rescaled so the pooled
      // empirical second moment per coordinate is exactly 1.
      const double lambda = 1.0;
      const double rmax = 20.0 * lambda;
      // CDF(r) = (1/lambda - 1/sqrt(lambda^2+r^2)) / z on [0, rmax].
      const double z = 1.0 / lambda - 1.0 / std::sqrt(lambda * lambda + rmax * rmax);
      for (Index i = 0; i < n; ++i) {
        const double inv = 1.0 / lambda - rng.uniform01() * z;
        const double r = std::sqrt(std::max(0.0, 1.0 / (inv * inv) - lambda * lambda));
        const double phi = 2.0 * M_PI * rng.uniform01();
        x(i, 0) = r * std::cos(phi);
        x(i, 1) = r * std::sin(phi);
      }
      const double pooled = std::sqrt(x.leftCols(2).squaredNorm() / (2.0 * static_cast<double>(n)));
      if (pooled > 0.0) x.leftCols(2) /= pooled;
      note = "model E: radial law truncated at 20*lambda and rescaled to unit empirical variance";
      break;
    }
  }
}

}  // namespace

GeneratedData generate(const ModelSpec& spec) {
  if (spec.d < 3) throw InvalidSpec("generate: d must be at least 3");
  if (spec.n < 1) throw InvalidSpec("generate: N must be positive");
  if (spec.noise_r && *spec.noise_r <= 0.0) throw InvalidSpec("generate: noise_r must be positive");

  SplitRng root(spec.seed);
  SplitRng rot_rng = root.derive(kRotationTag);
  SplitRng sample_rng = root.derive(kSampleTag);

  const Index n = spec.n;
  const Index d = spec.d;
  Matrix x = Matrix::Zero(n, d);
  std::string note;
  fill_non_gaussian(spec.model, x, sample_rng, note);

  // Gaussian complement; optional geometric ladder of noise scales.
  const Index gauss_dims = d - 2;
  for (Index j = 0; j < gauss_dims; ++j) {
    double sd = 1.0;
    if (spec.noise_r) {
      const double r = *spec.noise_r;
      const double expo =
          gauss_dims > 1 ? -r + 2.0 * r * static_cast<double>(j) / static_cast<double>(gauss_dims - 1)
                         : 0.0;
      sd = std::pow(10.0, expo);
    }
    for (Index i = 0; i < n; ++i) x(i, 2 + j) = sd * sample_rng.normal();
  }

  GeneratedData out;
  out.rotation = random_rotation(d, rot_rng);
  out.data.samples = x * out.rotation.transpose();  // rows are R * x_i
  out.data.normalized = false;
  out.truth = SubspaceEstimate::from_basis(out.rotation.leftCols(2));
  out.note = note;
  return out;
}

Model model_from_string(const std::string& name) {
  if (name == "A") return Model::A;
  if (name == "B") return Model::B;
  if (name == "C") return Model::C;
  if (name == "D") return Model::D;
  if (name == "E") return Model::E;
  throw InvalidSpec("unknown model '" + name + "' (expected A..E)");
}

std::string model_to_string(Model model) {
  switch (model) {
    case Model::A: return "A";
    case Model::B: return "B";
    case Model::C: return "C";
    case Model::D: return "D";
    case Model::E: return "E";
  }
  return "?";
}

}  // namespace sngca
