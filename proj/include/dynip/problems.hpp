#pragma once

// Benchmark instances: ground truth, forward model and data for the three
// causality patterns, plus seeded noise with an exact norm.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dynip/bochner.hpp"
#include "dynip/operators.hpp"

namespace dynip {

struct ProblemInstance {
  std::string label;
  std::shared_ptr<const DynamicForward> forward;
  SpatialGrid space;
  BochnerFunction truth;
  BochnerFunction data;        ///< forward applied to truth
  bool static_truth = false;   ///< truth is constant in time
};

/// Moving bump seen through a rotating window after Gaussian smoothing.
ProblemInstance make_dct_analogue(std::size_t n_t, std::size_t n_x, double width,
                                  std::size_t window, double horizon = 1.0);
/// Same bump and smoothing with an explicit mask, one index set per node.
ProblemInstance make_dct_analogue(std::size_t n_t, std::size_t n_x, double width,
                                  std::vector<std::vector<std::size_t>> pattern,
                                  double horizon = 1.0);

/// One receive coil: y = B[A_t c] with s(x,t) = sin(2 pi (x + t/T)) and
/// transfer kernel a(tau) = exp(-decay * tau). The concentration is static.
ProblemInstance make_mpi_analogue(std::size_t n_t, std::size_t n_x, double decay,
                                  double horizon = 1.0);
/// Same model with transfer-kernel samples a(k dt), k = 0..n_t-1.
ProblemInstance make_mpi_analogue(std::size_t n_t, std::size_t n_x, std::vector<double> samples,
                                  double horizon = 1.0);

/// y(t) = (1/t) K theta with a time-constant truth.
ProblemInstance make_nonuniform_example(std::size_t n_t, std::size_t n_x, double width = 0.05,
                                        double horizon = 1.0);

/// K = S(t) = Id, for smoke tests.
ProblemInstance make_identity_problem(std::size_t n_t, std::size_t n_x, double horizon = 1.0);

/// Data of `instance` recomputed for a different truth.
BochnerFunction forward_data(const ProblemInstance& instance, const BochnerFunction& truth);

struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
  double fraction = 0.99;
  /// Rescale every time section to fraction * level / sqrt(n_t) instead of
  /// the whole perturbation; the total norm is the same.
  bool per_section = false;
};

/// y + e with e seeded standard normal, rescaled to ||e|| = fraction * level.
BochnerFunction add_noise(const BochnerFunction& y, const NoiseSpec& spec);

/// Writes truth.csv, data_clean.csv, data_noisy.csv and meta.txt.
void export_instance(const std::filesystem::path& dir, const ProblemInstance& instance,
                     const BochnerFunction& noisy, const NoiseSpec& spec);

}  // namespace dynip
