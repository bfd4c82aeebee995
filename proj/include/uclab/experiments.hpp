#pragma once

#include "uclab/config.hpp"
#include "uclab/reports.hpp"
#include "uclab/sde.hpp"

#include <optional>

namespace uclab {

struct RunOptions {
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> paths_override;
  std::optional<int> workers_override;
};

struct RunResult {
  bool pass = false;
  nlohmann::json report; // the report.json payload
};

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
RunResult run_experiment_file(const std::string& config_path, const RunOptions& opts);

std::string list_experiments_text();
nlohmann::json list_experiments_json();

// Shared generators (also used by the test suites).
Field gaussian_field(const Grid& g, std::array<double, 2> center, double width,
                     double amplitude = 1.0);
std::vector<Field> make_data(const ExperimentConfig& cfg, const Grid& g);
CoefficientField make_coefficients(const ExperimentConfig& cfg, const Grid& g, double T);
// Product-of-cosines space-time fields with |a| <= a_bound, |b| <= b_bound and
// an analytic gradient bound for b.
CoefficientField random_trig_coefficients(std::uint64_t seed, double a_bound, double b_bound,
                                          const Grid& g, double T);

} // namespace uclab
