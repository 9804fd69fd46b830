#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apjac/cli.hpp"
#include "apjac/errors.hpp"

using namespace apjac;
using namespace apjac::cli;
namespace fs = std::filesystem;

namespace {

const char* kStd = R"({"xi": 12, "levels": [{"degree": 2, "a": 16.248076809271922}], "depth": 3,
  "digits": [1, 1, 0], "extra_radices": [2], "window": [0, 63]})";

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("apjac_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(dir / file) << text;
    return dir / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "apjac");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config("{"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"levels": []})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "colour": 1})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "levels": [{"degree": 2}]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "levels": [{"degree": 2, "a": 16.25}], "digits": [0, 0]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "levels": [{"degree": 2, "a": 16.25}], "digits": [2]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "window": [5, 1]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "verify": {"checks": ["nonsense"]}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"xi": 12, "levels": [{"degree": 2, "a": 4}]})"), ValidationError);
}

TEST_CASE("decimal strings are accepted for numbers") {
  const auto a = parse_config(R"({"xi": "12", "levels": [{"degree": 2, "critical_magnitude": "132"}]})");
  const auto b = parse_config(R"({"xi": 12, "levels": [{"degree": 2, "critical_magnitude": 132}]})");
  CHECK(a.tower.xi == 12.0);
  CHECK(a.tower.levels[0].coefficients()[0] == b.tower.levels[0].coefficients()[0]);
  CHECK(a.tower.seed.p == 6.0);
}

TEST_CASE("check lists and perturbations") {
  CHECK(parse_check_list("chain,wronskian") == std::vector<std::string>{"chain", "wronskian"});
  CHECK_THROWS_AS(parse_check_list("chain,bogus"), ValidationError);
  const auto p = parse_perturbation("p:10:0.5");
  CHECK(p.field == 'p');
  CHECK(p.site == 10);
  CHECK(p.delta == 0.5);
  CHECK(parse_perturbation("q:-3:-1e-3").site == -3);
  CHECK_THROWS_AS(parse_perturbation("r:1:1"), ValidationError);
  CHECK_THROWS_AS(parse_perturbation("p:1"), ValidationError);
}

TEST_CASE("coefficients csv round trip") {
  const JacobiWindow J(3, {0.1, -0.2, 1.0 / 3.0}, {6.0, std::sqrt(2.0)});
  const auto text = coefficients_csv(J, {4, 5});
  CHECK(text.rfind("k,p,q\n", 0) == 0);
  const auto rows = parse_coefficients_csv(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 4);
  CHECK(rows[0].p == 6.0);
  CHECK(rows[1].q == 1.0 / 3.0);
  CHECK(rows[1].p == std::sqrt(2.0));
  CHECK_THROWS_AS(parse_coefficients_csv("k,q,p\n"), ValidationError);
}

TEST_CASE("build writes coefficients and report") {
  Scratch s("build");
  const auto cfg = s.write("c.json", kStd);
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  const auto rows = parse_coefficients_csv(slurp(s.dir / "coefficients.csv"));
  REQUIRE(rows.size() == 64);
  CHECK(rows.front().k == 0);
  const auto report = nlohmann::json::parse(slurp(s.dir / "report.json"));
  CHECK(report["depth"] == 3);
  CHECK(report["increments"].size() == 3);
  CHECK(report["rate"].get<double>() < 1.0);

  const auto first = slurp(s.dir / "coefficients.csv");
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  CHECK(slurp(s.dir / "coefficients.csv") == first);
  CHECK(slurp(s.dir / "report.json") == slurp(s.dir / "report.json"));
}

TEST_CASE("build with no levels echoes the seed") {
  Scratch s("seed");
  const auto cfg = s.write("c.json", R"({"xi": 12, "window": [0, 9], "seed": {"q": 0.5, "p": 3}})");
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  for (const auto& r : parse_coefficients_csv(slurp(s.dir / "coefficients.csv"))) {
    CHECK(r.q == 0.5);
    CHECK(r.p == 3.0);
  }
}

TEST_CASE("verify passes, and fails on a perturbed coupling") {
  Scratch s("verify");
  const auto cfg = s.write("c.json", kStd);
  CHECK(invoke({"verify", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  auto v = nlohmann::json::parse(slurp(s.dir / "verify.json"));
  CHECK(v["pass"] == true);

  CHECK(invoke({"verify", "--config", cfg.string(), "--out", s.dir.string(), "--perturb", "p:32:0.5"}) ==
        kVerificationFailed);
  v = nlohmann::json::parse(slurp(s.dir / "verify.json"));
  CHECK(v["pass"] == false);

  CHECK(invoke({"verify", "--config", cfg.string(), "--out", s.dir.string(), "--checks", "chain"}) == kOk);
  v = nlohmann::json::parse(slurp(s.dir / "verify.json"));
  CHECK(v["checks"].size() == 1);
}

TEST_CASE("verify accepts a written coefficients file") {
  Scratch s("roundtrip");
  const auto cfg = s.write("c.json", kStd);
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  const auto csv = (s.dir / "coefficients.csv").string();
  CHECK(invoke({"verify", "--config", cfg.string(), "--out", s.dir.string(), "--coefficients", csv}) == kOk);

  auto rows = slurp(s.dir / "coefficients.csv");
  const auto at = rows.find("\n32,");
  REQUIRE(at != std::string::npos);
  rows.replace(at, 4, "\n32,1");
  rows.insert(at + 5, "0");
  const auto bad = s.write("bad.csv", rows);
  CHECK(invoke({"verify", "--config", cfg.string(), "--out", s.dir.string(), "--coefficients", bad.string()}) ==
        kVerificationFailed);
}

TEST_CASE("bands, metric and probe") {
  Scratch s("analysis");
  const auto cfg = s.write("c.json", kStd);
  REQUIRE(invoke({"bands", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  const auto bands = nlohmann::json::parse(slurp(s.dir / "bands.json"));
  CHECK(bands["levels"].size() == 4);
  CHECK(bands["levels"][1]["bands"][1][0].get<double>() == doctest::Approx(std::sqrt(120.0)).epsilon(1e-10));
  CHECK(bands["levels"][3]["count"] == 8);

  REQUIRE(invoke({"metric", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  std::istringstream metric(slurp(s.dir / "metric.csv"));
  std::string line;
  std::getline(metric, line);
  CHECK(line == "l,m,rho,section");
  double prev = INFINITY;
  int rows = 0;
  while (std::getline(metric, line)) {
    const auto a = line.find(',', line.find(',') + 1);
    const double rho = std::stod(line.substr(a + 1));
    CHECK(rho < prev);
    prev = rho;
    ++rows;
  }
  CHECK(rows == 4);

  REQUIRE(invoke({"probe", "--config", cfg.string(), "--out", s.dir.string()}) == kOk);
  const auto probe = nlohmann::json::parse(slurp(s.dir / "probe.json"));
  CHECK(probe["paper_delta"].get<double>() == doctest::Approx(0.12));
  CHECK(probe["max_ratio"].get<double>() <= 0.2);
}

TEST_CASE("exit codes") {
  Scratch s("exit");
  CHECK(invoke({"build", "--config", (s.dir / "missing.json").string()}) == kConfigError);
  CHECK(invoke({"build"}) == kConfigError);
  CHECK(invoke({"frobnicate", "--config", "x"}) == kConfigError);
  const auto bad = s.write("bad.json", R"({"xi": 12, "levels": [{"degree": 2, "a": 4}]})");
  CHECK(invoke({"build", "--config", bad.string()}) == kConfigError);
  const auto unknown = s.write("u.json", kStd);
  CHECK(invoke({"verify", "--config", unknown.string(), "--out", s.dir.string(), "--checks", "nope"}) == kConfigError);
}

TEST_CASE("output bytes do not depend on the thread cap") {
  Scratch s("threads");
  const auto cfg = s.write("c.json", kStd);
  const auto one = s.dir / "one";
  const auto four = s.dir / "four";
  fs::create_directories(one);
  fs::create_directories(four);
  setenv("RENORM_THREADS", "1", 1);
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", one.string()}) == kOk);
  setenv("RENORM_THREADS", "4", 1);
  REQUIRE(invoke({"build", "--config", cfg.string(), "--out", four.string()}) == kOk);
  unsetenv("RENORM_THREADS");
  CHECK(slurp(one / "coefficients.csv") == slurp(four / "coefficients.csv"));
  CHECK(slurp(one / "report.json") == slurp(four / "report.json"));
}
