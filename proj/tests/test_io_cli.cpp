#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "sngca/dataset.hpp"
#include "sngca/errors.hpp"
#include "sngca/io.hpp"
#include "sngca/types.hpp"

using namespace sngca;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sngca_io_cli_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
}

// Run the CLI through the shell; returns the exit status.
int run_cli(const std::string& args, const std::string& log, const std::string& env = "") {
  const std::string cmd =
      (env.empty() ? "" : env + " ") + std::string(SNGCA_CLI_PATH) + " " + args + " >" + log +
      " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("format_double survives a parse round trip") {
  for (const double v : {1.0 / 3.0, 1e300, 5e-324, 0.1, -123456.789012345678,
                         9007199254740993.0, 2.2250738585072014e-308}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("data CSV round trip is bit exact") {
  TempDir tmp;
  Matrix m(4, 3);
  m << 1.0 / 3.0, -2.5e-17, 3.0,
      1e300, 5e-324, -0.125,
      0.0, 7.000000000000001, -1e-300,
      123456789.12345679, -3.14159265358979312, 42.0;
  const std::string path = tmp.file("round.csv");
  write_data_csv(path, m);

  const std::string text = slurp(path);
  CHECK(text.rfind("x1,x2,x3\n", 0) == 0);

  const Matrix back = read_data_csv(path);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("data CSV reader rejects malformed input") {
  TempDir tmp;
  CHECK_THROWS_AS(read_data_csv(tmp.file("missing.csv")), IoError);

  spit(tmp.file("empty.csv"), "");
  CHECK_THROWS_AS(read_data_csv(tmp.file("empty.csv")), IoError);

  spit(tmp.file("ragged.csv"), "x1,x2\n1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(read_data_csv(tmp.file("ragged.csv")), IoError);

  spit(tmp.file("alpha.csv"), "x1,x2\n1.0,two\n");
  CHECK_THROWS_AS(read_data_csv(tmp.file("alpha.csv")), IoError);

  spit(tmp.file("blank.csv"), "x1,x2\n1.0,2.0\n\n3.0,4.0\n");
  CHECK_THROWS_AS(read_data_csv(tmp.file("blank.csv")), IoError);

  // CRLF endings and a missing final newline are tolerated.
  spit(tmp.file("crlf.csv"), "x1,x2\r\n1.5,2.5\r\n-3.5,4.5");
  const Matrix m = read_data_csv(tmp.file("crlf.csv"));
  REQUIRE(m.rows() == 2);
  CHECK(m(1, 0) == -3.5);
}

TEST_CASE("manifest parsing, overrides, and validation") {
  TempDir tmp;
  spit(tmp.file("run.json"), R"({
    "model": "D", "d": 8, "N": 500, "J": 40, "L": 30, "max_iter": 4,
    "delta_stop": 0.1, "C_mvee": 1.5, "alpha": 0.02, "m_hint": 2,
    "seed": 77, "replications": 3, "family": "mixed", "family_alpha": 0.25,
    "noise_r": 2.0
  })");
  const RunManifest m = read_manifest(tmp.file("run.json"));
  CHECK(m.model.value() == "D");
  CHECK(m.d == 8);
  CHECK(m.n == 500);
  CHECK(m.j_probes.value() == 40);
  CHECK(m.l_directions.value() == 30);
  CHECK(m.max_iter.value() == 4);
  CHECK(m.delta_stop == 0.1);
  CHECK(m.c_mvee == 1.5);
  CHECK(m.alpha == 0.02);
  CHECK(m.m_hint.value() == 2);
  CHECK(m.seed == 77);
  CHECK(m.replications == 3);
  CHECK(m.family == FamilySelection::Mixed);
  CHECK(m.family_alpha == 0.25);
  CHECK(m.noise_r.value() == 2.0);
  m.validate();

  spit(tmp.file("unknown.json"), R"({"model": "C", "bogus_key": 1})");
  CHECK_THROWS_AS(read_manifest(tmp.file("unknown.json")), ConfigError);

  spit(tmp.file("family.json"), R"({"family": "cosine"})");
  CHECK_THROWS_AS(read_manifest(tmp.file("family.json")), ConfigError);

  spit(tmp.file("broken.json"), "{not json");
  CHECK_THROWS_AS(read_manifest(tmp.file("broken.json")), ConfigError);

  CHECK_THROWS_AS(read_manifest(tmp.file("absent.json")), IoError);

  RunManifest bad;
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // neither model nor input
  bad.model = "C";
  bad.input_path = "x.csv";
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // both
  bad.input_path.reset();
  bad.n = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.n = 100;
  bad.family_alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("generate subcommand writes data plus a parsable truth sidecar") {
  TempDir tmp;
  const std::string data = tmp.file("gen.csv");
  const int rc = run_cli("generate --model C --d 5 --N 60 --seed 9 --out " + data,
                         tmp.file("gen.log"));
  CHECK(rc == 0);

  const Matrix m = read_data_csv(data);
  CHECK(m.rows() == 60);
  CHECK(m.cols() == 5);

  const nlohmann::json side = nlohmann::json::parse(slurp(tmp.file("gen.truth.json")));
  CHECK(side["model"] == "C");
  CHECK(side["d"] == 5);
  CHECK(side["N"] == 60);
  CHECK(side["seed"] == 9);
  CHECK(side["m"] == 2);
  REQUIRE(side["truth_basis"].size() == 5);
  REQUIRE(side["truth_basis"][0].size() == 2);
  double norm0 = 0.0;
  for (const auto& row : side["truth_basis"])
    norm0 += row[0].get<double>() * row[0].get<double>();
  CHECK(norm0 == doctest::Approx(1.0).epsilon(1e-12));

  // Identical seeds give identical bytes.
  const std::string again = tmp.file("gen2.csv");
  CHECK(run_cli("generate --model C --d 5 --N 60 --seed 9 --out " + again,
                tmp.file("gen2.log")) == 0);
  CHECK(slurp(again) == slurp(data));
}

TEST_CASE("run subcommand produces the iteration CSV and summary JSON") {
  TempDir tmp;
  const std::string out_dir = (tmp.path / "report").string();
  const int rc = run_cli(
      "run --model C --d 3 --N 250 --J 9 --L 9 --max_iter 2 --m_hint 2 --seed 4 "
      "--replications 2 --family_alpha 0.5 --delta_stop 1e-9 --out_dir " + out_dir,
      tmp.file("run.log"));
  CHECK(rc == 0);

  const std::string csv = slurp(out_dir + "/iterations.csv");
  CHECK(csv.rfind("replication,iteration,epsilon,cosine,m_estimated,delta_star,wall_ms\n", 0) ==
        0);
  int lines = 0;
  for (const char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 1 + 2 * 2);  // header + 2 replications x 2 iterations

  const nlohmann::json summary = nlohmann::json::parse(slurp(out_dir + "/summary.json"));
  CHECK(summary.contains("version"));
  CHECK(summary.contains("timestamp"));
  CHECK(summary["config"]["model"] == "C");
  CHECK(summary["config"]["family_alpha"] == 0.5);
  CHECK(summary["config"]["replications"] == 2);
  REQUIRE(summary["iterations"].size() == 2);
  CHECK(summary["iterations"][0]["count"] == 2);
  CHECK(summary["iterations"][0]["mean_epsilon"].is_number());
  CHECK(summary["iterations"][0]["var_epsilon"].is_number());
}

TEST_CASE("run subcommand accepts file input and an on-disk manifest") {
  TempDir tmp;
  const std::string data = tmp.file("input.csv");
  REQUIRE(run_cli("generate --model D --d 3 --N 300 --seed 12 --out " + data,
                  tmp.file("gen.log")) == 0);

  spit(tmp.file("manifest.json"),
       R"({"input": ")" + data + R"(", "max_iter": 1, "m_hint": 2, "seed": 8,)" +
           R"( "J": 9, "L": 9, "replications": 1, "family_alpha": 0.5})");
  const std::string out_dir = (tmp.path / "from_file").string();
  const int rc = run_cli("run --manifest " + tmp.file("manifest.json") + " --out_dir " + out_dir,
                         tmp.file("run.log"));
  CHECK(rc == 0);

  // File mode has no ground truth: epsilon column is empty, cosine still set
  // from the second iteration onward (absent here with max_iter = 1).
  const std::string csv = slurp(out_dir + "/iterations.csv");
  CHECK(csv.find("\n1,1,,,2,") != std::string::npos);

  const nlohmann::json summary = nlohmann::json::parse(slurp(out_dir + "/summary.json"));
  CHECK(summary["iterations"][0]["mean_epsilon"].is_null());
}

TEST_CASE("configuration mistakes exit with code 2") {
  TempDir tmp;
  CHECK(run_cli("run --model Z --d 3 --N 100 --replications 1", tmp.file("a.log")) == 2);
  CHECK(run_cli("run --model C --d 3 --N 0 --replications 1", tmp.file("b.log")) == 2);
  CHECK(run_cli("run --model C --no_such_flag 1", tmp.file("c.log")) == 2);
  CHECK(run_cli("generate --model Q --out " + tmp.file("q.csv"), tmp.file("d.log")) == 2);

  spit(tmp.file("bad.json"), R"({"model": "C", "mystery": true})");
  CHECK(run_cli("run --manifest " + tmp.file("bad.json"), tmp.file("e.log")) == 2);

  // Constant column: rejected during normalization.
  spit(tmp.file("const.csv"), "x1,x2,x3\n1.0,2.0,5.0\n2.0,3.0,5.0\n0.5,1.0,5.0\n");
  CHECK(run_cli("run --input " + tmp.file("const.csv") +
                    " --max_iter 1 --m_hint 1 --replications 1",
                tmp.file("f.log")) == 2);
}

TEST_CASE("unrecoverable numerical degeneracy exits with code 3") {
  TempDir tmp;
  // Two probes in five dimensions cannot span: the rounding step fails on the
  // original directions and again on the retry.
  const int rc = run_cli(
      "run --model C --d 5 --N 120 --J 2 --L 4 --max_iter 1 --m_hint 2 --seed 6 "
      "--replications 1 --out_dir " + (tmp.path / "deg").string(),
      tmp.file("deg.log"));
  CHECK(rc == 3);
  CHECK(slurp(tmp.file("deg.log")).find("numerical error") != std::string::npos);
}

TEST_CASE("results do not depend on the worker-thread cap") {
  TempDir tmp;
  const std::string base =
      " --model C --d 3 --N 250 --J 9 --L 9 --max_iter 2 --m_hint 2 --seed 4 "
      "--replications 2 --family_alpha 0.5 --delta_stop 1e-9 --out_dir ";
  const std::string one = (tmp.path / "one").string();
  const std::string four = (tmp.path / "four").string();
  CHECK(run_cli("run" + base + one, tmp.file("one.log"), "NGCA_THREADS=1") == 0);
  CHECK(run_cli("run" + base + four, tmp.file("four.log"), "NGCA_THREADS=4") == 0);
  // Drop the trailing wall-clock column; everything else must match exactly.
  const auto strip_timing = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
      out.append(line, 0, line.rfind(','));
      out.push_back('\n');
    }
    return out;
  };
  CHECK(strip_timing(slurp(one + "/iterations.csv")) ==
        strip_timing(slurp(four + "/iterations.csv")));
}
