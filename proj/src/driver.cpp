#include "sngca/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <utility>

#include "sngca/errors.hpp"
#include "sngca/normality.hpp"
#include "sngca/parallel.hpp"

namespace sngca {

namespace {

constexpr std::uint64_t kRetryTag = 0x52455452;     // direction re-randomization
constexpr std::uint64_t kClassifyTag = 0x434c5346;  // axis-classification subsampling
constexpr std::uint64_t kDirsTag = 0x44495253;      // per-iteration direction stream

Vector random_unit(SplitRng& rng, Index d) {
  Vector v(d);
  while (true) {
    for (Index i = 0; i < d; ++i) v[i] = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm >= 1e-12) return v / norm;
  }
}

Vector span_unit(SplitRng& rng, const Matrix& basis) {
  const Index m = basis.cols();
  Vector z(m);
  while (true) {
    for (Index i = 0; i < m; ++i) z[i] = rng.uniform(-1.0, 1.0);
    const Vector w = basis * z;
    const double norm = w.norm();
    if (norm >= 1e-12) return w / norm;
  }
}

DirectionSet random_directions(Index j_probes, Index l_directions, Index d, SplitRng& rng) {
  DirectionSet out;
  out.xis.resize(j_probes, d);
  for (Index j = 0; j < j_probes; ++j) out.xis.row(j) = random_unit(rng, d).transpose();
  out.omegas.reserve(static_cast<std::size_t>(j_probes));
  for (Index j = 0; j < j_probes; ++j) {
    Matrix block(l_directions, d);
    for (Index l = 0; l < l_directions; ++l) block.row(l) = random_unit(rng, d).transpose();
    out.omegas.push_back(std::move(block));
  }
  out.retry = rng.derive(kRetryTag);
  return out;
}

std::vector<TestFamily> family_schedule(FamilySelection selection, double alpha,
                                        Index l_directions) {
  std::vector<TestFamily> fams(static_cast<std::size_t>(l_directions));
  for (Index l = 0; l < l_directions; ++l) {
    const bool asym = selection == FamilySelection::Mixed && (l % 2) == 1;
    fams[static_cast<std::size_t>(l)].kind =
        asym ? FamilyKind::AsymmetricGauss : FamilyKind::HyperbolicTangent;
    fams[static_cast<std::size_t>(l)].alpha = alpha;
  }
  return fams;
}

void run_once(const Dataset& data, const DirectionSet& dirs, const SngcaConfig& cfg,
              const std::vector<TestFamily>& fams, IterationRecord& rec) {
  const Index d = data.dim();
  const std::size_t j_probes = static_cast<std::size_t>(dirs.xis.rows());
  if (dirs.omegas.size() != j_probes)
    throw DimensionMismatch("direction set has mismatched probe and omega counts");

  rec.betas.assign(j_probes, Vector());
  rec.residuals.assign(j_probes, 0.0);
  parallel_for(j_probes, [&](std::size_t j) {
    const std::vector<MomentPair> moments = estimate_moments(data, fams, dirs.omegas[j]);
    const ProjectionResult res =
        convex_projection(dirs.xis.row(static_cast<Index>(j)).transpose(), moments, cfg.solver);
    rec.betas[j] = res.beta_hat;
    rec.residuals[j] = res.residual;
  });

  rec.ellipsoid = mvee_round(rec.betas, cfg.c_mvee);
  rec.axes = principal_axes(rec.ellipsoid);
  rec.axis_flags = classify_axes(data, rec.axes.axes, cfg.alpha, dirs.retry.derive(kClassifyTag));

  if (cfg.m_hint) {
    rec.estimate = build_projector(rec.axes, *cfg.m_hint);
    return;
  }
  Index m = 0;
  for (const bool flag : rec.axis_flags) m += flag ? 1 : 0;
  if (m == 0) {
    rec.estimate = SubspaceEstimate::empty(d);
    return;
  }
  Matrix basis(d, m);
  Index col = 0;
  for (Index k = 0; k < rec.axes.axes.cols(); ++k)
    if (rec.axis_flags[static_cast<std::size_t>(k)]) basis.col(col++) = rec.axes.axes.col(k);
  rec.estimate = SubspaceEstimate::from_basis(basis);
}

}  // namespace

SngcaConfig SngcaConfig::with_defaults(Index d) { return with_defaults(d, SngcaConfig()); }

SngcaConfig SngcaConfig::with_defaults(Index d, SngcaConfig base) {
  if (d < 1) throw ConfigError("dimension must be positive");
  if (base.d != 0 && base.d != d)
    throw ConfigError("config dimension disagrees with the data dimension");
  SngcaConfig cfg = base;
  cfg.d = d;
  if (cfg.j_probes == 0) cfg.j_probes = 7 * d;
  if (cfg.l_directions == 0) cfg.l_directions = 6 * d;
  if (cfg.max_iter == 0)
    cfg.max_iter = std::max(1, static_cast<int>(std::ceil(3.0 * std::log(static_cast<double>(d)))));

  if (cfg.j_probes < 1) throw ConfigError("j_probes must be positive");
  if (cfg.l_directions < 1) throw ConfigError("l_directions must be positive");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(cfg.delta_stop > 0.0 && cfg.delta_stop < 1.0))
    throw ConfigError("delta_stop must lie in (0, 1)");
  if (!(cfg.c_mvee >= 1.0)) throw ConfigError("c_mvee must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(cfg.family_alpha > 0.0)) throw ConfigError("family_alpha must be positive");
  if (cfg.m_hint && (*cfg.m_hint < 1 || *cfg.m_hint > d))
    throw ConfigError("m_hint must lie in [1, d]");
  if (!(cfg.solver.kkt_tol > 0.0) || !(cfg.solver.feas_tol_rel > 0.0) ||
      cfg.solver.max_outer < 1 || cfg.solver.max_inner < 1)
    throw ConfigError("solver options must be positive");
  return cfg;
}

DirectionSet sample_directions(int k, const std::optional<SubspaceEstimate>& prev,
                               const SngcaConfig& cfg, SplitRng& rng) {
  if (k < 1) throw ConfigError("iteration index must be positive");
  if (cfg.d < 1 || cfg.j_probes < 1 || cfg.l_directions < 1)
    throw ConfigError("config is missing dimensions; build it with with_defaults");
  const Index d = cfg.d;
  const bool adapt = k > 1 && prev.has_value() && prev->m > 0;
  if (adapt && prev->dim() != d)
    throw DimensionMismatch("previous estimate dimension disagrees with config");

  if (!adapt) return random_directions(cfg.j_probes, cfg.l_directions, d, rng);

  const Index budget = static_cast<Index>(k) * d;
  const Index n1 = std::max<Index>(0, std::min(budget, cfg.j_probes - d));
  const Index n2 = std::max<Index>(0, std::min(budget, cfg.l_directions - d));

  DirectionSet out;
  out.adapted_probes = n1;
  out.adapted_directions = n2;
  out.xis.resize(cfg.j_probes, d);
  for (Index j = 0; j < cfg.j_probes; ++j)
    out.xis.row(j) =
        (j < n1 ? span_unit(rng, prev->basis) : random_unit(rng, d)).transpose();
  out.omegas.reserve(static_cast<std::size_t>(cfg.j_probes));
  for (Index j = 0; j < cfg.j_probes; ++j) {
    Matrix block(cfg.l_directions, d);
    for (Index l = 0; l < cfg.l_directions; ++l)
      block.row(l) = (l < n2 ? span_unit(rng, prev->basis) : random_unit(rng, d)).transpose();
    out.omegas.push_back(std::move(block));
  }
  out.retry = rng.derive(kRetryTag);
  return out;
}

IterationRecord run_iteration(const Dataset& data, const DirectionSet& dirs,
                              const SngcaConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index l_directions = dirs.omegas.empty() ? Index(0) : dirs.omegas[0].rows();
  const std::vector<TestFamily> fams = family_schedule(cfg.family, cfg.family_alpha, l_directions);
  IterationRecord rec;
  try {
    run_once(data, dirs, cfg, fams, rec);
  } catch (const DegenerateSpan&) {
    // One remediation pass with fresh, unadapted directions.
    SplitRng retry_rng = dirs.retry;
    const DirectionSet fresh =
        random_directions(dirs.xis.rows(), l_directions, data.dim(), retry_rng);
    rec = IterationRecord();
    run_once(data, fresh, cfg, fams, rec);
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

std::vector<IterationRecord> run_sngca(const Dataset& data, const SngcaConfig& cfg,
                                       const std::optional<SubspaceEstimate>& truth) {
  if (!data.normalized)
    throw ConfigError("run_sngca expects normalized data; call normalize() first");
  const SngcaConfig full = SngcaConfig::with_defaults(data.dim(), cfg);
  if (truth && truth->dim() != data.dim())
    throw DimensionMismatch("truth dimension disagrees with the data");

  const SplitRng master(full.seed);
  std::vector<IterationRecord> records;
  records.reserve(static_cast<std::size_t>(full.max_iter));
  std::optional<SubspaceEstimate> prev;

  for (int k = 1; k <= full.max_iter; ++k) {
    SplitRng iter_rng = master.derive(kDirsTag, static_cast<std::uint64_t>(k));
    const DirectionSet dirs = sample_directions(k, prev, full, iter_rng);
    IterationRecord rec = run_iteration(data, dirs, full);
    rec.k = k;
    if (truth) rec.error_vs_truth = subspace_error(rec.estimate, *truth);
    if (prev) rec.cosine_vs_previous = max_subspace_cosine(prev->basis, rec.estimate.basis);
    records.push_back(std::move(rec));
    const IterationRecord& cur = records.back();

    bool stop = false;
    if (truth && k >= 2) {
      const double prev_err = records[records.size() - 2].error_vs_truth;
      const double improvement = prev_err - cur.error_vs_truth;
      if (improvement < full.delta_stop * prev_err) stop = true;
    } else if (!truth && k >= 2) {
      const double misalign = 1.0 - cur.cosine_vs_previous;
      if (misalign <= 1e-12) {
        stop = true;
      } else if (k >= 3) {
        const double prev_misalign = 1.0 - records[records.size() - 2].cosine_vs_previous;
        if (misalign <= full.delta_stop * prev_misalign) stop = true;
      }
    }
    prev = cur.estimate;
    if (stop) break;
  }
  return records;
}

}  // namespace sngca
