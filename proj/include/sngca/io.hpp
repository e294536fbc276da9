#pragma once

#include <optional>
#include <string>

#include "sngca/driver.hpp"
#include "sngca/synthetic.hpp"
#include "sngca/types.hpp"

namespace sngca {

/*
 * Data CSV layout: header x1,...,xd, one sample per row, comma separator,
 * '.' decimal point, LF line endings, doubles printed with %.17g so a
 * read-back reproduces the matrix bit for bit.
 */
void write_data_csv(const std::string& path, const Matrix& samples);
Matrix read_data_csv(const std::string& path);

/* Run configuration as read from a manifest JSON and/or CLI flags. */
struct RunManifest {
  std::optional<std::string> model;       // exactly one of model / input_path
  std::optional<std::string> input_path;
  Index d = 10;
  Index n = 1000;
  std::optional<Index> j_probes;
  std::optional<Index> l_directions;
  std::optional<int> max_iter;
  double delta_stop = 0.05;
  double c_mvee = 2.0;
  double alpha = 0.05;
  std::optional<Index> m_hint;
  std::uint64_t seed = 0;
  int replications = 1;
  FamilySelection family = FamilySelection::TanhOnly;
  double family_alpha = 0.5;
  std::optional<double> noise_r;

  /* Throws ConfigError unless exactly one of model/input_path is set etc. */
  void validate() const;
};

RunManifest read_manifest(const std::string& path);

FamilySelection family_from_string(const std::string& name);
std::string family_to_string(FamilySelection family);

/* Sidecar JSON for generated data: model, sizes, seed, truth basis, note. */
void write_truth_sidecar(const std::string& path, const ModelSpec& spec,
                         const GeneratedData& gen);

/* Format a double with enough digits to round-trip exactly. */
std::string format_double(double v);

}  // namespace sngca
