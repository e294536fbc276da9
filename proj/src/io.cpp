#include "sngca/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sngca/errors.hpp"

namespace sngca {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& token, const std::string& path) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError("malformed numeric field '" + token + "' in " + path);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_data_csv(const std::string& path, const Matrix& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const Index d = samples.cols();
  for (Index j = 0; j < d; ++j) out << (j ? ",x" : "x") << (j + 1);
  out << '\n';
  for (Index i = 0; i < samples.rows(); ++i) {
    for (Index j = 0; j < d; ++j) {
      if (j) out << ',';
      out << format_double(samples(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

Matrix read_data_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::size_t d = split_csv_line(line).size();
  if (d == 0) throw IoError("missing header in " + path);

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == EOF) break;
      throw IoError("blank line in " + path);
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != d)
      throw IoError("row " + std::to_string(rows + 2) + " of " + path + " has " +
                    std::to_string(fields.size()) + " fields, expected " + std::to_string(d));
    for (const std::string& f : fields) values.push_back(parse_double(f, path));
    ++rows;
  }

  Matrix samples(static_cast<Index>(rows), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < d; ++j)
      samples(static_cast<Index>(i), static_cast<Index>(j)) = values[i * d + j];
  return samples;
}

FamilySelection family_from_string(const std::string& name) {
  if (name == "tanh") return FamilySelection::TanhOnly;
  if (name == "mixed") return FamilySelection::Mixed;
  throw ConfigError("unknown family '" + name + "' (expected tanh or mixed)");
}

std::string family_to_string(FamilySelection family) {
  return family == FamilySelection::TanhOnly ? "tanh" : "mixed";
}

void RunManifest::validate() const {
  if (model.has_value() == input_path.has_value())
    throw ConfigError("exactly one of model/input must be set");
  if (model) model_from_string(*model);  // throws for unknown names
  if (d < 1) throw ConfigError("d must be positive");
  if (n < 1) throw ConfigError("N must be positive");
  if (replications < 1) throw ConfigError("replications must be positive");
  if (noise_r && !(*noise_r > 0.0)) throw ConfigError("noise_r must be positive");
  if (!(family_alpha > 0.0)) throw ConfigError("family_alpha must be positive");
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest must be a JSON object: " + path);

  RunManifest m;
  try {
    for (const auto& [key, value] : j.items()) {
      if (value.is_null()) continue;
      if (key == "model") {
        m.model = value.get<std::string>();
      } else if (key == "input") {
        m.input_path = value.get<std::string>();
      } else if (key == "d") {
        m.d = value.get<Index>();
      } else if (key == "N") {
        m.n = value.get<Index>();
      } else if (key == "J") {
        m.j_probes = value.get<Index>();
      } else if (key == "L") {
        m.l_directions = value.get<Index>();
      } else if (key == "max_iter") {
        m.max_iter = value.get<int>();
      } else if (key == "delta_stop") {
        m.delta_stop = value.get<double>();
      } else if (key == "C_mvee") {
        m.c_mvee = value.get<double>();
      } else if (key == "alpha") {
        m.alpha = value.get<double>();
      } else if (key == "m_hint") {
        m.m_hint = value.get<Index>();
      } else if (key == "seed") {
        m.seed = value.get<std::uint64_t>();
      } else if (key == "replications") {
        m.replications = value.get<int>();
      } else if (key == "family") {
        m.family = family_from_string(value.get<std::string>());
      } else if (key == "family_alpha") {
        m.family_alpha = value.get<double>();
      } else if (key == "noise_r") {
        m.noise_r = value.get<double>();
      } else {
        throw ConfigError("unknown manifest key '" + key + "' in " + path);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest field error in " + path + ": " + e.what());
  }
  return m;
}

void write_truth_sidecar(const std::string& path, const ModelSpec& spec,
                         const GeneratedData& gen) {
  nlohmann::json j;
  j["model"] = model_to_string(spec.model);
  j["d"] = spec.d;
  j["N"] = spec.n;
  j["seed"] = spec.seed;
  if (spec.noise_r) j["noise_r"] = *spec.noise_r;
  j["m"] = gen.truth.m;
  std::vector<std::vector<double>> basis(static_cast<std::size_t>(gen.truth.basis.rows()));
  for (Index i = 0; i < gen.truth.basis.rows(); ++i)
    for (Index k = 0; k < gen.truth.basis.cols(); ++k)
      basis[static_cast<std::size_t>(i)].push_back(gen.truth.basis(i, k));
  j["truth_basis"] = basis;
  if (!gen.note.empty()) j["note"] = gen.note;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace sngca
