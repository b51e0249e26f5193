#include "davar/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "davar/csv.hpp"
#include "davar/verify.hpp"

namespace davar::cli {

namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string profile_output_name(const std::string& results_path, const std::string& kind) {
  std::string stem = fs::path(results_path).filename().string();
  if (const auto pos = stem.rfind("_results.csv"); pos != std::string::npos) {
    stem = stem.substr(0, pos);
  } else if (const auto dot = stem.rfind(".csv"); dot != std::string::npos) {
    stem = stem.substr(0, dot);
  }
  return kind == "rmse" ? stem + "_rmse_profile.csv" : stem + "_profile.csv";
}

}  // namespace

int run_command(const RunArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(args.config_path);
    if (args.out_dir) config.output.directory = *args.out_dir;
    if (args.workers) config.twin.workers = *args.workers;
    config.twin.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    const auto started = std::chrono::steady_clock::now();
    const ResultTable table = run_ensemble(config.twin);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

    const fs::path dir(config.output.directory);
    fs::create_directories(dir);
    const fs::path results_path = dir / (config.output.prefix + "_results.csv");
    const fs::path meta_path = dir / (config.output.prefix + "_meta.json");
    write_text_file(results_path, results_csv_string(table));
    write_text_file(meta_path, run_metadata_json(config).dump(2) + "\n");

    out << "wrote " << results_path.string() << " (" << table.size() << " rows, "
        << format_double(elapsed.count()) << " s)\n";
    out << "wrote " << meta_path.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int profile_command(const ProfileArgs& args, std::ostream& out, std::ostream& err) {
  if (args.kind != "accuracy" && args.kind != "rmse") {
    err << "error: --kind must be 'accuracy' or 'rmse'\n";
    return kExitConfigError;
  }
  try {
    const ResultTable table = read_results_csv_file(args.results_path);
    const ProfileCurve curve = args.kind == "rmse" ? rmse_profile(table, args.tau_f)
                                                   : accuracy_profile(table);
    const fs::path dir(args.out_dir.value_or(fs::path(args.results_path).parent_path().string()));
    if (!dir.empty()) fs::create_directories(dir);
    const fs::path profile_path = dir / profile_output_name(args.results_path, args.kind);
    write_text_file(profile_path, profile_csv_string(curve));
    out << "wrote " << profile_path.string() << " (" << curve.x.size() << " grid points)\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int check_command(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(args.config_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const std::vector<CheckResult> results = run_verification(config, args.n_problems);
    bool all_pass = true;
    for (const CheckResult& check : results) {
      all_pass = all_pass && check.pass;
      out << (check.pass ? "PASS" : "FAIL") << "  " << check.name << "  measured "
          << format_double(check.measured) << "  tolerance " << format_double(check.tolerance)
          << "  (" << check.detail << ")\n";
    }
    out << (all_pass ? "verification passed\n" : "verification FAILED\n");
    return all_pass ? kExitOk : kExitVerificationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace davar::cli
