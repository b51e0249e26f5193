#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "davar/config.hpp"

namespace davar::cli {

// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;
inline constexpr int kExitVerificationFailure = 3;

struct RunArgs {
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output.directory
  std::optional<int> workers;          // overrides ensemble.workers
};

struct ProfileArgs {
  std::string results_path;
  std::string kind = "accuracy";  // accuracy | rmse
  double tau_f = 1e-3;            // solved threshold for the rmse profile
  std::optional<std::string> out_dir;
};

struct CheckArgs {
  std::string config_path;
  int n_problems = 20;
};

/// Runs the configured ensemble and writes <prefix>_results.csv and
/// <prefix>_meta.json into the output directory.
int run_command(const RunArgs& args, std::ostream& out, std::ostream& err);

/// Computes a profile from a results CSV and writes
/// <prefix>_profile.csv (accuracy) or <prefix>_rmse_profile.csv.
int profile_command(const ProfileArgs& args, std::ostream& out, std::ostream& err);

/// Runs the numerical verification suite; one pass/fail line per check.
int check_command(const CheckArgs& args, std::ostream& out, std::ostream& err);

}  // namespace davar::cli
