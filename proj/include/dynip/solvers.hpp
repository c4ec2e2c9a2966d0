#pragma once

// Regularization schemes in the Hilbert case (all exponents 2): tracking and
// uniform Tikhonov, an a-priori parameter rule, and cyclic Kaczmarz
// iterations over time sections stopped by the adapted discrepancy principle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dynip/bochner.hpp"
#include "dynip/linear_map.hpp"
#include "dynip/operators.hpp"

namespace dynip {

enum class StopReason { discrepancy, max_iter, tolerance };
std::string_view to_string(StopReason reason);

struct TraceRow {
  std::size_t iter = 0;
  std::optional<std::size_t> subproblem;
  double residual = 0.0;
  std::optional<double> alpha;
  std::optional<double> error;
};

struct SolveReport {
  /// Space-time function, or a single spatial vector for static sources.
  std::variant<std::vector<double>, BochnerFunction> reconstruction;
  std::vector<TraceRow> trace;  ///< one row per iteration
  std::vector<double> alphas;   ///< per time node (one entry for uniform)
  StopReason stop = StopReason::max_iter;
  std::size_t iterations = 0;
  std::optional<double> error;
  std::optional<double> relative_error;
  /// ||(A*A + alpha) x - A*y|| / ||A*y|| at the returned Tikhonov minimizer
  /// (largest over nodes for tracking).
  std::optional<double> normal_residual;
  /// Section residuals over the last completed cycle, as tested by the
  /// discrepancy principle.
  std::vector<double> cycle_residuals;
  /// Section residuals at the returned iterate.
  std::vector<double> final_residuals;
  double seconds = 0.0;
};

std::vector<double> coordinates(const SolveReport& report);

struct ParameterRule {
  double scale = 1.0;     ///< c
  double exponent = 1.0;  ///< kappa
};

/// alpha = c * delta^kappa with kappa in (0, r) and c > 0.
double choose_alpha(const ParameterRule& rule, double delta, double data_exponent = 2.0);

struct TikhonovConfig {
  double tolerance = 1e-10;  ///< relative normal-equation residual
  std::size_t max_iter = 0;  ///< CG iterations per solve; 0 picks 20 * dim + 1000
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;  ///< recomputed, not the recursive estimate
  bool converged = false;
};

/// Conjugate gradients on (A*A + alpha) x = A*b. `x` holds the start and
/// returns the solution; `history`, when given, receives the recursive
/// relative residual after each iteration.
CgResult cg_normal_equations(const LinearMap& a, double alpha, std::span<const double> b,
                             std::span<double> x, const TikhonovConfig& config,
                             std::vector<double>* history = nullptr);

/// Tracking: per node i, argmin ||A_i x - y(t_i)||^2 / 2 + alpha_i ||x||^2 / 2,
/// snapshots held piecewise constant. Pointwise kind only. `alphas` has one
/// entry (used at every node) or n_t entries.
SolveReport tikhonov_temporal(const DynamicForward& forward, const BochnerFunction& data,
                              std::span<const double> alphas, const TikhonovConfig& config = {},
                              const BochnerFunction* truth = nullptr);

/// argmin ||F theta - y||^2 / 2 + alpha ||theta||^2 / 2 over the space-time
/// unknown, or over a static source x (theta = iota x, penalty alpha ||x||_X^2 / 2)
/// when `static_source` is set. Any composition kind.
SolveReport tikhonov_uniform(const DynamicForward& forward, const BochnerFunction& data,
                             double alpha, const TikhonovConfig& config = {},
                             bool static_source = false, const BochnerFunction* truth = nullptr);

/// One linear sub-problem of a Kaczmarz cycle.
struct Subproblem {
  std::shared_ptr<const LinearMap> map;
  std::vector<double> data;
  double noise_level = 0.0;  ///< delta_i
  double tau = 2.0;          ///< tau_i >= 1
};

struct KaczmarzConfig {
  std::optional<double> step;  ///< nullopt: 0.9 / ||F_i||^2 by power iteration
  std::size_t max_sweeps = 500;
  std::size_t memory = 1;  ///< search directions for the multi-direction variant
  /// Alternative stop: all cycle residuals at or below this value.
  std::optional<double> residual_tolerance;
  /// Skip the step on sections whose residual is already within tau_i delta_i.
  bool skip_satisfied = false;
  std::size_t power_iterations = 30;
  std::uint64_t power_seed = 0;
};

/// Largest singular value by power iteration on A*A from a seeded start.
double estimate_norm(const LinearMap& map, std::size_t iterations, std::uint64_t seed);

/// x <- x - omega A*(A x - y); returns the residual before the step.
double landweber_step(const Subproblem& sub, double omega, std::span<double> x);

/// x <- x - sum_k t_k A*(A h_k - y) with residual-optimal t over the given
/// iterates h_k (damped Gram system); returns the residual before the step.
double subspace_step(const Subproblem& sub, std::span<const std::vector<double>> iterates,
                     std::span<double> x);

/// Optional error evaluation of an iterate against a known solution.
struct ErrorProbe {
  std::function<double(std::span<const double>)> error;
  double truth_norm = 0.0;
};

SolveReport landweber_kaczmarz(const std::vector<Subproblem>& subproblems,
                               const KaczmarzConfig& config, std::span<const double> start,
                               const ErrorProbe* probe = nullptr);

/// Sequential-subspace variant: each step uses the gradients of the current
/// section at the last min(m, n + 1) iterates with residual-optimal weights.
SolveReport kaczmarz_multi_direction(const std::vector<Subproblem>& subproblems,
                                     const KaczmarzConfig& config, std::span<const double> start,
                                     const ErrorProbe* probe = nullptr);

enum class NoiseSplit {
  share,   ///< delta_i = delta / sqrt(N)
  global,  ///< delta_i = delta, a guaranteed bound on each section
};

std::vector<double> split_noise_level(double delta, std::size_t count, NoiseSplit split);

/// Time sections of y = F theta with section weight dt * w_Y, so the squared
/// section residuals sum to the squared data residual.
std::vector<Subproblem> time_subproblems(std::shared_ptr<const DynamicForward> forward,
                                         const BochnerFunction& data,
                                         std::span<const double> noise_levels, double tau,
                                         bool static_source);

/// Kaczmarz over the time sections of `forward`, started at zero. The
/// reconstruction is returned as a space-time function, or as a spatial
/// vector when `static_source` is set.
SolveReport kaczmarz_time(std::shared_ptr<const DynamicForward> forward,
                          const BochnerFunction& data, std::span<const double> noise_levels,
                          double tau, bool static_source, const KaczmarzConfig& config,
                          bool multi_direction, const BochnerFunction* truth = nullptr);

}  // namespace dynip
