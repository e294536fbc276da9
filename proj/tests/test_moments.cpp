#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sngca/dataset.hpp"
#include "sngca/errors.hpp"
#include "sngca/moments.hpp"
#include "sngca/rng.hpp"
#include "sngca/subspace.hpp"
#include "sngca/synthetic.hpp"
#include "sngca/test_functions.hpp"

using namespace sngca;

namespace {

Dataset wrap(const Matrix& samples) {
  Dataset d;
  d.samples = samples;
  return d;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("single sample at the origin gives gamma = 0, eta = omega") {
  Matrix omegas(1, 3);
  omegas << 1.0, 0.0, 0.0;
  const auto pairs = estimate_moments(wrap(Matrix::Zero(1, 3)), TestFamily{}, omegas);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].gamma_hat.norm() == 0.0);
  CHECK((pairs[0].eta_hat - omegas.row(0).transpose()).norm() == 0.0);
}

TEST_CASE("symmetric two-point data matches the hand-written sums") {
  SplitRng rng(21);
  const Index d = 4;
  const double alpha = 0.8;
  Vector y(d);
  for (Index i = 0; i < d; ++i) y[i] = rng.normal();
  Matrix samples(2, d);
  samples.row(0) = y.transpose();
  samples.row(1) = -y.transpose();
  const Vector w = oracle::random_unit(rng, d);
  Matrix omegas(1, d);
  omegas.row(0) = w.transpose();

  const auto pairs = estimate_moments(wrap(samples), TestFamily{FamilyKind::HyperbolicTangent, alpha},
                                      omegas);

  // gamma: both terms equal y tanh(w'y) e^{-alpha ||y||^2/2}.  eta averages
  // the two analytic gradients; the x-proportional parts are equal as well
  // since both x and tanh(w'x) flip sign.
  const double u = w.dot(y);
  const double damp = std::exp(-0.5 * alpha * y.squaredNorm());
  const Vector gamma_hand = y * std::tanh(u) * damp;
  const double sech2 = 1.0 - std::tanh(u) * std::tanh(u);
  const Vector eta_hand = (sech2 * w - alpha * std::tanh(u) * y) * damp;

  CHECK((pairs[0].gamma_hat - gamma_hand).norm() <= 1e-15 * (1.0 + gamma_hand.norm()));
  CHECK((pairs[0].eta_hat - eta_hand).norm() <= 1e-15 * (1.0 + eta_hand.norm()));
}

TEST_CASE("pure Gaussian noise gives near-zero Stein residual at N = 1e5") {
  // E[X h(X)] = E[grad h(X)] for standard normal X (Stein), so eta - gamma
  // vanishes in the pure-noise model; gamma itself does not.
  SplitRng rng(22);
  const Index n = 100000, d = 2;
  Matrix samples(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) samples(i, j) = rng.normal();
  Matrix omegas(2, d);
  omegas.row(0) = oracle::random_unit(rng, d).transpose();
  omegas.row(1) = oracle::random_unit(rng, d).transpose();

  for (const auto& pair : estimate_moments(wrap(samples), TestFamily{}, omegas)) {
    CHECK((pair.eta_hat - pair.gamma_hat).norm() <= 0.02);
    CHECK(pair.gamma_hat.norm() > 0.1);  // the population value is eta, not 0
  }
}

TEST_CASE("per-direction families match repeated single-family calls") {
  SplitRng rng(23);
  const Index n = 50, d = 3;
  Matrix samples(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) samples(i, j) = rng.normal();
  Matrix omegas(2, d);
  omegas.row(0) = oracle::random_unit(rng, d).transpose();
  omegas.row(1) = oracle::random_unit(rng, d).transpose();

  const TestFamily tanh_fam{FamilyKind::HyperbolicTangent, 0.5};
  const TestFamily asym_fam{FamilyKind::AsymmetricGauss, 0.5};
  const auto mixed = estimate_moments(wrap(samples), {tanh_fam, asym_fam}, omegas);
  const auto all_tanh = estimate_moments(wrap(samples), tanh_fam, omegas);
  const auto all_asym = estimate_moments(wrap(samples), asym_fam, omegas);

  CHECK((mixed[0].eta_hat - all_tanh[0].eta_hat).norm() == 0.0);
  CHECK((mixed[1].eta_hat - all_asym[1].eta_hat).norm() == 0.0);
  CHECK((mixed[1].gamma_hat - all_asym[1].gamma_hat).norm() == 0.0);
}

TEST_CASE("empty data is rejected") {
  Matrix omegas(1, 3);
  omegas << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(estimate_moments(wrap(Matrix(0, 3)), TestFamily{}, omegas), EmptyData);
}

TEST_CASE("exact representation inside the l1 ball is recovered") {
  Vector xi(3);
  xi << 0.0, 0.0, 1.0;
  MomentPair pair;
  pair.eta_hat = xi;
  pair.gamma_hat = Vector::Zero(3);
  const ProjectionResult res = convex_projection(xi, {pair});
  CHECK(res.c_hat.size() == 1);
  CHECK(res.c_hat[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.residual <= 1e-6);
  CHECK((res.beta_hat - xi).norm() <= 1e-6);
}

TEST_CASE("probe orthogonal to the dictionary span keeps c near zero") {
  SplitRng rng(24);
  Vector xi(4);
  xi << 0.0, 0.0, 0.0, 1.0;
  std::vector<MomentPair> moments(3);
  for (auto& pair : moments) {
    pair.eta_hat = Vector::Zero(4);
    for (Index i = 0; i < 3; ++i) pair.eta_hat[i] = rng.normal();  // span e1..e3
    pair.gamma_hat = Vector::Zero(4);
  }
  const ProjectionResult res = convex_projection(xi, moments);
  CHECK(res.residual == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.beta_hat.norm() <= 1e-3);
}

TEST_CASE("permuting the moment pairs permutes c and preserves beta") {
  SplitRng rng(25);
  for (int rep = 0; rep < 5; ++rep) {
    const auto inst = oracle::random_projection_instance(rng);
    const Index l = static_cast<Index>(inst.moments.size());
    if (l < 2) continue;

    std::vector<Index> perm(static_cast<std::size_t>(l));
    for (Index i = 0; i < l; ++i) perm[static_cast<std::size_t>(i)] = (i + 1) % l;
    std::vector<MomentPair> shuffled(static_cast<std::size_t>(l));
    for (Index i = 0; i < l; ++i)
      shuffled[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
          inst.moments[static_cast<std::size_t>(i)];

    const ProjectionResult a = convex_projection(inst.xi, inst.moments);
    const ProjectionResult b = convex_projection(inst.xi, shuffled);
    CHECK(std::abs(a.residual - b.residual) <= 1e-10);
    CHECK((a.beta_hat - b.beta_hat).norm() <= 1e-8);
    for (Index i = 0; i < l; ++i)
      CHECK(std::abs(a.c_hat[i] - b.c_hat[perm[static_cast<std::size_t>(i)]]) <= 1e-8);
  }
}

TEST_CASE("solver matches the face-enumeration oracle on small instances") {
  SplitRng rng(26);
  for (int rep = 0; rep < 60; ++rep) {
    const auto inst = oracle::random_projection_instance(rng);
    const ProjectionResult res = convex_projection(inst.xi, inst.moments);

    // Contract invariants of the returned result.
    const double scale = inst.g.cwiseAbs().maxCoeff();
    CHECK(res.c_hat.lpNorm<1>() <= 1.0 + 1e-8);
    CHECK(res.feasibility_gap <= 1e-7 * std::max(scale, 1e-300));
    CHECK((res.beta_hat - inst.h * res.c_hat).norm() <= 1e-12);

    const double oracle_residual = oracle::min_residual_face_enum(inst.xi, inst.h, inst.g);
    CHECK(res.residual <= oracle_residual + 1e-4);
    // The oracle respects the same constraints, so it can only be better.
    CHECK(oracle_residual <= res.residual + 1e-6);
  }
}

TEST_CASE("off-subspace component of beta shrinks as N grows") {
  const Index d = 6;
  std::vector<double> medians;
  for (const Index n : {Index(250), Index(1000), Index(4000)}) {
    std::vector<double> perp;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ModelSpec spec;
      spec.model = Model::A;
      spec.d = d;
      spec.n = n;
      spec.seed = 900 + seed;
      const GeneratedData gen = generate(spec);
      const Dataset data = normalize(gen.data);
      const SubspaceEstimate truth = map_to_normalized(gen.truth, data.col_std);
      const Matrix residual_proj = Matrix::Identity(d, d) - truth.projector;

      SplitRng rng(1234 + seed);
      Matrix omegas(18, d);
      for (Index i = 0; i < omegas.rows(); ++i)
        omegas.row(i) = oracle::random_unit(rng, d).transpose();
      const auto moments = estimate_moments(data, TestFamily{FamilyKind::HyperbolicTangent, 0.05},
                                            omegas);
      for (int j = 0; j < 12; ++j) {
        const Vector xi = oracle::random_unit(rng, d);
        const ProjectionResult res = convex_projection(xi, moments);
        perp.push_back((residual_proj * res.beta_hat).norm());
      }
    }
    medians.push_back(median(perp));
  }
  // Monotone within Monte-Carlo noise: each step may wiggle 15%, the whole
  // sweep must clearly decrease.
  CHECK(medians[1] <= medians[0] * 1.15);
  CHECK(medians[2] <= medians[1] * 1.15);
  CHECK(medians[2] <= medians[0] * 0.9);
}

TEST_CASE("l1 ball projection is exact on hand cases") {
  Vector v(3), v_expected(3);
  v << 3.0, 0.0, 0.0;
  v_expected << 1.0, 0.0, 0.0;
  CHECK((project_l1_ball(v) - v_expected).norm() == 0.0);

  Vector inside(2);
  inside << 0.25, -0.25;
  CHECK((project_l1_ball(inside) - inside).norm() == 0.0);

  // Projection of (1,1) onto the ball: (0.5, 0.5).
  Vector corner(2);
  corner << 1.0, 1.0;
  const Vector p = project_l1_ball(corner);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
}
