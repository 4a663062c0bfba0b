#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ridgemg/analysis.hpp"
#include "ridgemg/krylov.hpp"

namespace ridgemg {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Declarative experiment description; JSON on disk, see README for the
// schema.  Every field is validated on load and invalid fields raise
// ConfigError naming the offending key.
struct ExperimentConfig {
  std::filesystem::path dataset;
  std::string dataset_name;  // defaults to the dataset file stem
  std::vector<double> beta_grid;
  std::vector<double> tol_grid;
  std::vector<std::string> methods;
  std::vector<LevelSpec> levels;
  SolverConfig solver;       // tol is overridden per grid cell
  std::size_t n_repeats = 50;
  std::uint64_t rhs_seed = 0;
  std::filesystem::path output = "results.csv";
  unsigned threads = 1;
};

/// Loads and validates a config file.  Relative dataset/output paths are
/// resolved against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin,
                              const std::filesystem::path& base_dir = {});

/// JSON echo of the fully resolved configuration (defaults filled in), for
/// provenance next to the result CSV.
std::string config_to_json(const ExperimentConfig& config);

/// Runs the configured experiment: read matrix, build methods, sweep the
/// grid, write the CSV and the config echo (<output>.config.json).
/// Returns the benchmark rows.
std::vector<BenchRow> run_experiment(const ExperimentConfig& config);

}  // namespace ridgemg
