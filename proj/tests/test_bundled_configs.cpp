#include "doctest.h"

#include "uclab/experiments.hpp"

#include <filesystem>

// End-to-end runs of the bundled configs that finish quickly; the heavier ones
// (energy_check with its full ensemble) are exercised through ctest's CLI run.

using namespace uclab;

namespace {

RunResult run_bundled(const std::string& name, const std::string& out,
                      std::optional<int> paths = std::nullopt) {
  const std::filesystem::path cfg =
      std::filesystem::path(UCLAB_SOURCE_DIR) / "configs" / name;
  RunOptions opts;
  opts.output_dir =
      (std::filesystem::temp_directory_path() / "uclab_bundled" / out).string();
  std::filesystem::remove_all(opts.output_dir);
  opts.paths_override = paths;
  return run_experiment_file(cfg.string(), opts);
}

} // namespace

TEST_CASE("bundled h0 config runs and passes") {
  const RunResult res = run_bundled("h0.cfg", "h0");
  CHECK(res.pass);
  CHECK(res.report["reports"].size() == 2);
}

TEST_CASE("bundled two-ball config runs and passes") {
  const RunResult res = run_bundled("two_ball.cfg", "two_ball");
  CHECK(res.pass);
}

TEST_CASE("bundled interpolation config runs and passes") {
  const RunResult res = run_bundled("interpolation.cfg", "interpolation");
  CHECK(res.pass);
}

TEST_CASE("bundled observability config emits its artifacts") {
  const RunResult res = run_bundled("observability.cfg", "obs");
  CHECK(res.pass);
  const auto dir = std::filesystem::temp_directory_path() / "uclab_bundled" / "obs";
  CHECK(std::filesystem::exists(dir / "telescoping.csv"));
  CHECK(std::filesystem::exists(dir / "observability_report.json"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
}

TEST_CASE("bundled hum config emits the control") {
  const RunResult res = run_bundled("hum.cfg", "hum");
  CHECK(res.pass);
  const auto dir = std::filesystem::temp_directory_path() / "uclab_bundled" / "hum";
  CHECK(std::filesystem::exists(dir / "control.csv"));
  CHECK(std::filesystem::exists(dir / "hum_report.json"));
}

TEST_CASE("bundled monotonicity config emits the frequency trace") {
  const RunResult res = run_bundled("monotonicity.cfg", "mono", 60);
  CHECK(res.pass);
  const auto dir = std::filesystem::temp_directory_path() / "uclab_bundled" / "mono";
  CHECK(std::filesystem::exists(dir / "frequency_trace.csv"));
}

TEST_CASE("bundled all config drives every verifier") {
  const RunResult res = run_bundled("all.cfg", "all");
  CHECK(res.pass);
  CHECK(res.report["reports"].size() >= 10);
}
