#include "doctest.h"

#include <stdexcept>

#include "uclab/experiments.hpp"

#include <filesystem>
#include <fstream>

using namespace uclab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config_text(
      "# comment\n[experiment]\nkind = energy\n[grid]\ndim = 1\npoints = 128\nextent = 16\n"
      "[timeset]\nintervals = 0.1:0.3, 0.5:0.6\n");
  CHECK(cfg.kind == "energy");
  CHECK(cfg.get_int("grid.points", 0) == 128);
  CHECK(cfg.get_double("grid.extent", 0.0) == 16.0);
  const auto iv = cfg.get_intervals("timeset.intervals");
  REQUIRE(iv.size() == 2);
  CHECK(iv[1].first == 0.5);

  CHECK_THROWS_WITH_AS(parse_config_text("[experiment]\nkind = energy\ngamma_fudge = 1\n"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("[grid]\npoints = 128\n"),
                       doctest::Contains("missing experiment.kind"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("[experiment]\nkind = juggling\n"),
                       doctest::Contains("unknown experiment kind"), std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nkind = energy\nkind = energy\n"),
                  std::runtime_error);
}

TEST_CASE("missing config file") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/path.cfg"),
                       doctest::Contains("config not found"), std::runtime_error);
}

TEST_CASE("experiment listing is stable, ten kinds, json matches text") {
  const std::string a = list_experiments_text();
  const std::string b = list_experiments_text();
  CHECK(a == b);
  int lines = 0;
  for (char c : a) lines += c == '\n';
  CHECK(lines == 10);
  const auto j = list_experiments_json();
  CHECK(j.size() == 10);
  for (const auto& row : j) CHECK(a.find(row["kind"].get<std::string>()) != std::string::npos);
}

TEST_CASE("energy run writes artifacts and reproduces bit-identically across workers") {
  const ExperimentConfig cfg = parse_config_text(
      "[experiment]\nkind = energy\n"
      "[grid]\ndim = 1\npoints = 64\nextent = 16\n"
      "[coeffs]\nkind = constant\na0 = 0.5\nb0 = 0.3\n"
      "[time]\nT = 0.25\nsteps = 64\n"
      "[ensemble]\npaths = 64\nseed = 99\n");

  const auto tmp = std::filesystem::temp_directory_path() / "uclab_cfg_test";
  std::filesystem::remove_all(tmp);

  RunOptions o1;
  o1.output_dir = (tmp / "w1").string();
  o1.workers_override = 1;
  const RunResult r1 = run_experiment(cfg, o1);
  CHECK(r1.pass);
  CHECK(std::filesystem::exists(tmp / "w1" / "report.json"));
  CHECK(std::filesystem::exists(tmp / "w1" / "manifest.json"));

  RunOptions o2;
  o2.output_dir = (tmp / "w4").string();
  o2.workers_override = 4;
  const RunResult r2 = run_experiment(cfg, o2);
  CHECK(slurp(tmp / "w1" / "report.json") == slurp(tmp / "w4" / "report.json"));
  CHECK(r2.pass);

  // exit-status contract: pass iff every verdict passes
  for (const auto& rep : r1.report["reports"]) CHECK(rep["verdict"] == "pass");
}

TEST_CASE("seed and path overrides change the digest") {
  const ExperimentConfig cfg = parse_config_text(
      "[experiment]\nkind = energy\n[grid]\ndim = 1\npoints = 64\nextent = 16\n"
      "[coeffs]\nkind = constant\na0 = 0.1\nb0 = 0.2\n[time]\nT = 0.25\nsteps = 32\n"
      "[ensemble]\npaths = 16\nseed = 1\n");
  const auto tmp = std::filesystem::temp_directory_path() / "uclab_cfg_test2";
  std::filesystem::remove_all(tmp);
  RunOptions a;
  a.output_dir = (tmp / "a").string();
  RunOptions b = a;
  b.output_dir = (tmp / "b").string();
  b.seed_override = 2;
  const RunResult ra = run_experiment(cfg, a);
  const RunResult rb = run_experiment(cfg, b);
  CHECK(ra.report["inputs_digest"] != rb.report["inputs_digest"]);
}
