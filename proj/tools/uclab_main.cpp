#include "CLI11.hpp"

#include "uclab/experiments.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"uclab: verification experiments for stochastic heat flow estimates"};
  app.require_subcommand(1);

  std::string config_path;
  uclab::RunOptions opts;
  std::uint64_t seed_override = 0;
  int paths_override = 0;
  int workers = 0;
  bool json_flag = false;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "path to the experiment config")->required();
  run->add_option("--output-dir", opts.output_dir, "artifact directory (default ./out)");
  auto* seed_opt = run->add_option("--seed-override", seed_override, "replace the ensemble seed");
  auto* paths_opt =
      run->add_option("--paths-override", paths_override, "replace the Monte Carlo path count");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  run->add_flag("--json", json_flag, "echo report.json to stdout");

  auto* list = app.add_subcommand("list", "list the available experiment kinds");
  list->add_flag("--json", json_flag, "machine-readable listing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      if (json_flag)
        std::cout << uclab::list_experiments_json().dump(2) << "\n";
      else
        std::cout << uclab::list_experiments_text();
      return 0;
    }
    if (seed_opt->count() > 0) opts.seed_override = seed_override;
    if (paths_opt->count() > 0) opts.paths_override = paths_override;
    if (workers > 0) opts.workers_override = workers;
    const uclab::RunResult res = uclab::run_experiment_file(config_path, opts);
    if (json_flag) std::cout << res.report.dump(2) << "\n";
    std::cerr << (res.pass ? "PASS" : "FAIL") << " (" << opts.output_dir << "/report.json)\n";
    return res.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
