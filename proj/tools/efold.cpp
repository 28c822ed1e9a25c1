#include "efold/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"e-fold cross-validation experiment runner"};
  app.require_subcommand(1);

  std::string run_config;
  std::string mode_text;
  int workers = 0;
  bool allow_failures = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment suite");
  run->add_option("--config", run_config, "experiment config (JSON)")->required();
  run->add_option("--mode", mode_text, "simulate or early-stop (overrides the config)");
  run->add_option("--workers", workers, "worker threads (overrides the config)");
  run->add_flag("--allow-failures", allow_failures,
                "exit 0 even when individual runs fail");

  std::string validate_config;
  CLI::App* validate =
      app.add_subcommand("validate", "check a config and its datasets without running");
  validate->add_option("--config", validate_config, "experiment config (JSON)")
      ->required();

  std::vector<std::string> records_paths;
  std::string output_dir;
  CLI::App* report =
      app.add_subcommand("report", "recompute the aggregate summary from records");
  report
      ->add_option("--records", records_paths,
                   "records.csv from a run (repeatable; files are merged)")
      ->required();
  report->add_option("--output-dir", output_dir,
                     "output directory (default: alongside the first records file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? efold::kExitOk : efold::kExitConfigError;
  }

  if (run->parsed()) {
    efold::RunOptions options;
    options.config_path = run_config;
    options.allow_failures = allow_failures;
    if (!mode_text.empty()) {
      try {
        options.mode_override = efold::run_mode_from_string(mode_text);
      } catch (const std::exception& ex) {
        std::cerr << ex.what() << "\n";
        return efold::kExitConfigError;
      }
    }
    if (run->count("--workers") > 0) options.workers_override = workers;
    return efold::cmd_run(options, std::cout, std::cerr);
  }
  if (validate->parsed()) {
    return efold::cmd_validate(validate_config, std::cout, std::cerr);
  }
  return efold::cmd_report(records_paths, output_dir, std::cout, std::cerr);
}
