#pragma once
// Experiment runner behind the `dynip` executable: a sectioned INI config,
// problem construction and the forward / solve / sweep / probe commands.
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynip/problems.hpp"
#include "dynip/solvers.hpp"

namespace dynip::cli {

struct ProblemConfig {
  std::string kind = "dct";  ///< dct, mpi, nonuniform, identity
  std::size_t n_t = 32;
  std::size_t n_x = 32;
  double horizon = 1.0;
  double width = 0.05;                ///< dct, nonuniform
  std::optional<std::size_t> window;  ///< dct; defaults to n_x
  double decay = 3.0;                 ///< mpi
  std::optional<std::filesystem::path> kernel_csv;  ///< mpi, replaces decay
  std::optional<std::filesystem::path> mask_csv;    ///< dct, replaces window
  std::optional<std::filesystem::path> data_csv;    ///< noisy data for solve
};

struct NoiseConfig {
  double delta = 0.01;
  std::uint64_t seed = 1;
  double fraction = 0.99;
  bool per_section = false;
};

struct SolverConfig {
  std::string method = "tikhonov_uniform";
  std::optional<double> alpha;  ///< fixed parameter; otherwise the rule
  ParameterRule rule;
  double tolerance = 1e-10;
  std::size_t cg_max_iter = 0;
  std::optional<double> step;
  std::size_t max_iter = 500;  ///< Kaczmarz sweeps
  double tau = 2.0;
  std::size_t memory = 3;
  NoiseSplit noise_split = NoiseSplit::share;
  bool static_source = false;
  bool skip_satisfied = false;
  std::optional<double> residual_tolerance;
  std::size_t power_iterations = 30;
  std::uint64_t power_seed = 0;
};

struct ProbeConfig {
  std::vector<std::string> probes;
  std::optional<std::size_t> time_index;
  bool vectors = false;
  std::vector<double> radii{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  double q = 2.0;
  std::size_t ensemble_size = 20;
  bool constant_ensemble = false;
  std::vector<double> shifts;  ///< grid multiples of dt; default 0..4 dt
  bool svg = true;
};

struct ExperimentConfig {
  ProblemConfig problem;
  NoiseConfig noise;
  SolverConfig solver;
  ProbeConfig probe;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  std::filesystem::path output = "out";
};

/// Strict parse: unknown sections or keys and out-of-range values throw
/// ConfigError naming `section.key`. Relative input paths resolve against
/// `base`; the output directory is taken as given.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

ProblemInstance build_problem(const ProblemConfig& config);

void cmd_forward(const ExperimentConfig& config);
void cmd_solve(const ExperimentConfig& config);
void cmd_sweep(const ExperimentConfig& config);
void cmd_probe(const ExperimentConfig& config);

struct SweepRow {
  double delta;
  std::optional<double> alpha;
  double error;
  double residual;
};
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::string_view text);
std::string sweep_svg(const std::vector<SweepRow>& rows);

/// Entry point; returns 0 on success, 2 for config errors, 3 for numerical
/// failures and 4 for I/O errors.
int run(int argc, char** argv);

}  // namespace dynip::cli
