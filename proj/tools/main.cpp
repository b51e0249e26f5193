#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "davar/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Twin-experiment toolkit for preconditioned 4D-Var with Gauss-Newton, "
               "line-search and regularised outer loops"};
  app.require_subcommand(1);

  davar::cli::RunArgs run_args;
  std::string run_out;
  int run_workers = -1;
  CLI::App* run = app.add_subcommand("run", "run a configured ensemble, write results CSV");
  run->add_option("--config", run_args.config_path, "experiment config file (JSON)")
      ->required();
  run->add_option("--out", run_out, "output directory (overrides output.directory)");
  run->add_option("--workers", run_workers, "ensemble worker threads (overrides config)");

  davar::cli::ProfileArgs profile_args;
  std::string profile_out;
  CLI::App* profile =
      app.add_subcommand("profile", "compute accuracy or RMSE profiles from a results CSV");
  profile->add_option("results", profile_args.results_path, "results CSV from `run`")
      ->required();
  profile->add_option("--kind", profile_args.kind, "profile kind: accuracy|rmse")
      ->default_val("accuracy");
  profile->add_option("--tau-f", profile_args.tau_f,
                      "solved threshold used by the rmse profile");
  profile->add_option("--out", profile_out, "output directory (default: beside the input)");

  davar::cli::CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check", "run the numerical verification suite");
  check->add_option("--config", check_args.config_path, "experiment config file (JSON)")
      ->required();
  check->add_option("--problems", check_args.n_problems, "random problems per check");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (!run_out.empty()) run_args.out_dir = run_out;
    if (run_workers >= 0) run_args.workers = run_workers;
    return davar::cli::run_command(run_args, std::cout, std::cerr);
  }
  if (profile->parsed()) {
    if (!profile_out.empty()) profile_args.out_dir = profile_out;
    return davar::cli::profile_command(profile_args, std::cout, std::cerr);
  }
  return davar::cli::check_command(check_args, std::cout, std::cerr);
}
