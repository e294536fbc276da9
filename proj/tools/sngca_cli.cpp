#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sngca/driver.hpp"
#include "sngca/errors.hpp"
#include "sngca/io.hpp"
#include "sngca/parallel.hpp"
#include "sngca/synthetic.hpp"
#include "sngca/version.hpp"

namespace {

using namespace sngca;

constexpr std::uint64_t kGenTag = 0x47454e44;  // per-replication data seed
constexpr std::uint64_t kRunTag = 0x52554e53;  // per-replication driver seed

std::string iso_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sidecar_path(const std::string& out) {
  const std::filesystem::path p(out);
  std::filesystem::path side = p;
  side.replace_extension();
  side += ".truth.json";
  return side.string();
}

SngcaConfig config_from(const RunManifest& m) {
  SngcaConfig cfg;
  cfg.j_probes = m.j_probes.value_or(0);
  cfg.l_directions = m.l_directions.value_or(0);
  cfg.max_iter = m.max_iter.value_or(0);
  cfg.delta_stop = m.delta_stop;
  cfg.c_mvee = m.c_mvee;
  cfg.alpha = m.alpha;
  cfg.m_hint = m.m_hint;
  cfg.family = m.family;
  cfg.family_alpha = m.family_alpha;
  return cfg;
}

void write_iteration_csv(const std::string& path,
                         const std::vector<std::vector<IterationRecord>>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "replication,iteration,epsilon,cosine,m_estimated,delta_star,wall_ms\n";
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    for (const IterationRecord& rec : runs[rep]) {
      out << rep + 1 << ',' << rec.k << ',';
      if (!std::isnan(rec.error_vs_truth)) out << format_double(rec.error_vs_truth);
      out << ',';
      if (!std::isnan(rec.cosine_vs_previous)) out << format_double(rec.cosine_vs_previous);
      out << ',' << rec.estimate.m << ',' << format_double(rec.ellipsoid.delta_star) << ','
          << format_double(rec.wall_ms) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

nlohmann::json config_echo(const RunManifest& m) {
  nlohmann::json j;
  if (m.model) j["model"] = *m.model;
  if (m.input_path) j["input"] = *m.input_path;
  j["d"] = m.d;
  j["N"] = m.n;
  if (m.j_probes) j["J"] = *m.j_probes;
  if (m.l_directions) j["L"] = *m.l_directions;
  if (m.max_iter) j["max_iter"] = *m.max_iter;
  j["delta_stop"] = m.delta_stop;
  j["C_mvee"] = m.c_mvee;
  j["alpha"] = m.alpha;
  if (m.m_hint) j["m_hint"] = *m.m_hint;
  j["seed"] = m.seed;
  j["replications"] = m.replications;
  j["family"] = family_to_string(m.family);
  j["family_alpha"] = m.family_alpha;
  if (m.noise_r) j["noise_r"] = *m.noise_r;
  return j;
}

void write_summary_json(const std::string& path, const RunManifest& m,
                        const std::vector<std::vector<IterationRecord>>& runs) {
  std::size_t max_len = 0;
  for (const auto& run : runs) max_len = std::max(max_len, run.size());

  nlohmann::json iterations = nlohmann::json::array();
  for (std::size_t k = 0; k < max_len; ++k) {
    std::vector<double> eps;
    for (const auto& run : runs)
      if (k < run.size() && !std::isnan(run[k].error_vs_truth))
        eps.push_back(run[k].error_vs_truth);
    nlohmann::json row;
    row["iteration"] = k + 1;
    std::size_t reached = 0;
    for (const auto& run : runs) reached += k < run.size() ? 1 : 0;
    row["count"] = reached;
    if (!eps.empty()) {
      double mean = 0.0;
      for (double e : eps) mean += e;
      mean /= static_cast<double>(eps.size());
      row["mean_epsilon"] = mean;
      if (eps.size() >= 2) {
        double var = 0.0;
        for (double e : eps) var += (e - mean) * (e - mean);
        var /= static_cast<double>(eps.size() - 1);
        row["var_epsilon"] = var;
      } else {
        row["var_epsilon"] = nullptr;
      }
    } else {
      row["mean_epsilon"] = nullptr;
      row["var_epsilon"] = nullptr;
    }
    iterations.push_back(row);
  }

  nlohmann::json j;
  j["version"] = kVersion;
  j["timestamp"] = iso_timestamp();
  j["config"] = config_echo(m);
  j["iterations"] = iterations;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

void do_generate(const ModelSpec& spec, const std::string& out) {
  const GeneratedData gen = generate(spec);
  write_data_csv(out, gen.data.samples);
  write_truth_sidecar(sidecar_path(out), spec, gen);
  if (!gen.note.empty()) std::cerr << "note: " << gen.note << '\n';
  std::cout << "wrote " << gen.data.n() << "x" << gen.data.dim() << " samples to " << out << '\n';
}

void do_run(const RunManifest& m, const std::string& out_dir) {
  m.validate();
  std::filesystem::create_directories(out_dir);

  std::optional<Dataset> shared;
  if (m.input_path) {
    Dataset raw;
    raw.samples = read_data_csv(*m.input_path);
    shared = normalize(raw);
  }

  const SplitRng master(m.seed);
  const std::size_t reps = static_cast<std::size_t>(m.replications);
  std::vector<std::vector<IterationRecord>> runs(reps);
  parallel_for(reps, [&](std::size_t rep) {
    SngcaConfig cfg = config_from(m);
    cfg.seed = master.derive(kRunTag, rep).seed();
    if (m.model) {
      ModelSpec spec;
      spec.model = model_from_string(*m.model);
      spec.d = m.d;
      spec.n = m.n;
      spec.seed = master.derive(kGenTag, rep).seed();
      spec.noise_r = m.noise_r;
      const GeneratedData gen = generate(spec);
      const Dataset norm = normalize(gen.data);
      const SubspaceEstimate truth = map_to_normalized(gen.truth, norm.col_std);
      runs[rep] = run_sngca(norm, cfg, truth);
    } else {
      runs[rep] = run_sngca(*shared, cfg);
    }
  });

  write_iteration_csv(out_dir + "/iterations.csv", runs);
  write_summary_json(out_dir + "/summary.json", m, runs);
  std::cout << "wrote " << out_dir << "/iterations.csv and " << out_dir << "/summary.json\n";
}

/*
 * Fixed-length benchmark cell: replications of a synthetic model driven
 * without truth-based stopping (max_iter iterations always run; delta_stop
 * is set so the cosine rule cannot fire), with epsilon computed afterwards
 * against the known rotated subspace.
 */
std::vector<std::vector<double>> benchmark_cell(Model model, Index d, Index n, int iters, int reps,
                                                std::uint64_t seed, std::optional<double> noise_r,
                                                double family_alpha) {
  const SplitRng master(seed);
  std::vector<std::vector<double>> eps(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
    ModelSpec spec;
    spec.model = model;
    spec.d = d;
    spec.n = n;
    spec.seed = master.derive(kGenTag, rep).seed();
    spec.noise_r = noise_r;
    const GeneratedData gen = generate(spec);
    const Dataset norm = normalize(gen.data);
    const SubspaceEstimate truth = map_to_normalized(gen.truth, norm.col_std);

    SngcaConfig cfg;
    cfg.max_iter = iters;
    cfg.delta_stop = 1e-9;  // keeps all iterations: see note above
    cfg.m_hint = 2;
    cfg.family_alpha = family_alpha;
    cfg.seed = master.derive(kRunTag, rep).seed();
    const std::vector<IterationRecord> records = run_sngca(norm, cfg);
    for (const IterationRecord& rec : records)
      eps[rep].push_back(subspace_error(rec.estimate, truth));
  });
  return eps;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void do_benchmark(const std::string& suite, const std::string& out_dir, int reps, int iters,
                  Index d, Index n, std::uint64_t seed, const std::string& models,
                  double family_alpha) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out;
  const auto open = [&](const std::string& name) {
    out.open(out_dir + "/" + name, std::ios::binary);
    if (!out) throw IoError("cannot open " + out_dir + "/" + name + " for writing");
  };

  if (suite == "progress") {
    open("progress.csv");
    out << "model,iteration,mean_epsilon,replications\n";
    std::istringstream list(models);
    std::string name;
    while (std::getline(list, name, ',')) {
      const Model model = model_from_string(name);
      const auto eps = benchmark_cell(model, d, n, iters, reps, seed, std::nullopt, family_alpha);
      for (int k = 0; k < iters; ++k) {
        std::vector<double> at_k;
        for (const auto& run : eps)
          if (k < static_cast<int>(run.size())) at_k.push_back(run[static_cast<std::size_t>(k)]);
        out << name << ',' << k + 1 << ',' << format_double(mean_of(at_k)) << ',' << at_k.size()
            << '\n';
      }
      std::cout << "progress " << name << ": iter-" << iters
                << " mean epsilon = " << format_double(mean_of([&] {
                     std::vector<double> last;
                     for (const auto& run : eps)
                       if (!run.empty()) last.push_back(run.back());
                     return last;
                   }()))
                << '\n';
    }
  } else if (suite == "noise") {
    open("noise.csv");
    out << "r,mean_epsilon,replications\n";
    for (int r = 1; r <= 8; ++r) {
      const auto eps =
          benchmark_cell(Model::B, d, n, iters, reps, seed + static_cast<std::uint64_t>(r),
                         static_cast<double>(r), family_alpha);
      std::vector<double> last;
      for (const auto& run : eps)
        if (!run.empty()) last.push_back(run.back());
      out << r << ',' << format_double(mean_of(last)) << ',' << last.size() << '\n';
      std::cout << "noise r=" << r << ": mean epsilon = " << format_double(mean_of(last)) << '\n';
    }
  } else if (suite == "dims") {
    open("dims.csv");
    out << "d,mean_epsilon,replications\n";
    for (const Index dim : {Index(10), Index(15), Index(20), Index(25), Index(30)}) {
      const auto eps = benchmark_cell(Model::B, dim, n, iters, reps,
                                      seed + static_cast<std::uint64_t>(dim), std::nullopt,
                                      family_alpha);
      std::vector<double> last;
      for (const auto& run : eps)
        if (!run.empty()) last.push_back(run.back());
      out << dim << ',' << format_double(mean_of(last)) << ',' << last.size() << '\n';
      std::cout << "dims d=" << dim << ": mean epsilon = " << format_double(mean_of(last)) << '\n';
    }
  } else {
    throw ConfigError("unknown suite '" + suite + "' (expected progress, noise, or dims)");
  }
  if (!out) throw IoError("write failed in " + out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse non-Gaussian component analysis"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Draw a synthetic benchmark dataset");
  std::string gen_model = "C";
  Index gen_d = 10;
  Index gen_n = 1000;
  std::uint64_t gen_seed = 0;
  double gen_noise_r = 0.0;
  std::string gen_out = "data.csv";
  gen_cmd->add_option("--model", gen_model, "Model name (A-E)")->capture_default_str();
  gen_cmd->add_option("--d", gen_d, "Ambient dimension")->capture_default_str();
  gen_cmd->add_option("--N", gen_n, "Sample count")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--noise_r", gen_noise_r, "Geometric noise-ladder exponent r");
  gen_cmd->add_option("--out", gen_out, "Output CSV path")->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the full estimation procedure");
  std::string run_manifest_path;
  std::string run_model, run_input, run_family;
  Index run_d = 0, run_n = 0, run_j = 0, run_l = 0, run_m_hint = 0;
  int run_max_iter = 0, run_reps = 0;
  double run_delta = 0.0, run_cmvee = 0.0, run_alpha = 0.0, run_noise_r = 0.0;
  std::uint64_t run_seed = 0;
  std::string run_out_dir = ".";
  run_cmd->add_option("--manifest", run_manifest_path, "Manifest JSON path");
  run_cmd->add_option("--model", run_model, "Model name (A-E)");
  run_cmd->add_option("--input", run_input, "Input data CSV");
  run_cmd->add_option("--d", run_d, "Ambient dimension (model mode)");
  run_cmd->add_option("--N", run_n, "Sample count (model mode)");
  run_cmd->add_option("--J", run_j, "Probe count (default 7d)");
  run_cmd->add_option("--L", run_l, "Directions per probe (default 6d)");
  run_cmd->add_option("--max_iter", run_max_iter, "Iteration cap (default ceil(3 ln d))");
  run_cmd->add_option("--delta_stop", run_delta, "Relative stopping threshold");
  run_cmd->add_option("--C_mvee", run_cmvee, "Rounding termination factor");
  run_cmd->add_option("--alpha", run_alpha, "Normality-test level");
  run_cmd->add_option("--m_hint", run_m_hint, "A-priori target dimension");
  run_cmd->add_option("--seed", run_seed, "Master seed");
  run_cmd->add_option("--replications", run_reps, "Replication count");
  run_cmd->add_option("--family", run_family, "Test family: tanh or mixed");
  double run_family_alpha = 0.0;
  run_cmd->add_option("--family_alpha", run_family_alpha, "Test-function damping exponent");
  run_cmd->add_option("--noise_r", run_noise_r, "Geometric noise-ladder exponent r");
  run_cmd->add_option("--out_dir", run_out_dir, "Report directory")->capture_default_str();

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "Desk-scale experiment suites");
  std::string bench_suite;
  std::string bench_out_dir = "bench";
  std::string bench_models = "C,D";
  int bench_reps = 5, bench_iters = 5;
  Index bench_d = 10, bench_n = 1000;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--suite", bench_suite, "progress | noise | dims")->required();
  bench_cmd->add_option("--out_dir", bench_out_dir, "Report directory")->capture_default_str();
  bench_cmd->add_option("--replications", bench_reps, "Replications per cell")
      ->capture_default_str();
  bench_cmd->add_option("--iters", bench_iters, "Iterations per run")->capture_default_str();
  bench_cmd->add_option("--d", bench_d, "Ambient dimension")->capture_default_str();
  bench_cmd->add_option("--N", bench_n, "Sample count")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--models", bench_models, "Progress-suite model list")
      ->capture_default_str();
  double bench_family_alpha = 0.05;  // desk-scale sweet spot; see README
  bench_cmd->add_option("--family_alpha", bench_family_alpha, "Test-function damping exponent")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) {
      ModelSpec spec;
      spec.model = model_from_string(gen_model);
      spec.d = gen_d;
      spec.n = gen_n;
      spec.seed = gen_seed;
      if (gen_cmd->count("--noise_r")) spec.noise_r = gen_noise_r;
      do_generate(spec, gen_out);
    } else if (run_cmd->parsed()) {
      RunManifest m;
      if (run_cmd->count("--manifest")) m = read_manifest(run_manifest_path);
      if (run_cmd->count("--model")) m.model = run_model;
      if (run_cmd->count("--input")) m.input_path = run_input;
      if (run_cmd->count("--d")) m.d = run_d;
      if (run_cmd->count("--N")) m.n = run_n;
      if (run_cmd->count("--J")) m.j_probes = run_j;
      if (run_cmd->count("--L")) m.l_directions = run_l;
      if (run_cmd->count("--max_iter")) m.max_iter = run_max_iter;
      if (run_cmd->count("--delta_stop")) m.delta_stop = run_delta;
      if (run_cmd->count("--C_mvee")) m.c_mvee = run_cmvee;
      if (run_cmd->count("--alpha")) m.alpha = run_alpha;
      if (run_cmd->count("--m_hint")) m.m_hint = run_m_hint;
      if (run_cmd->count("--seed")) m.seed = run_seed;
      if (run_cmd->count("--replications")) m.replications = run_reps;
      if (run_cmd->count("--family")) m.family = family_from_string(run_family);
      if (run_cmd->count("--family_alpha")) m.family_alpha = run_family_alpha;
      if (run_cmd->count("--noise_r")) m.noise_r = run_noise_r;
      do_run(m, run_out_dir);
    } else if (bench_cmd->parsed()) {
      do_benchmark(bench_suite, bench_out_dir, bench_reps, bench_iters, bench_d, bench_n,
                   bench_seed, bench_models, bench_family_alpha);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
