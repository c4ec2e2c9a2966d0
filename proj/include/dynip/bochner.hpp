#pragma once

// Discretized Lebesgue-Bochner spaces L^p(0,T;X).
//
// Time is sampled on a uniform midpoint grid, space on uniform cell
// midpoints. A space-time function stores one spatial vector per time node;
// norms are midpoint-rule quadratures of the continuum norms, summed in
// ascending index order so results are bit-reproducible.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynip {

/// Uniform midpoint grid on [0, T]: t_i = (i + 1/2) dt, dt = T / n.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t count);

  /// Grid with a prescribed step; the horizon is count * step.
  static TimeGrid from_step(double step, std::size_t count);

  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return count_; }
  double step() const noexcept { return step_; }
  double node(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * step_; }
  std::vector<double> nodes() const;

  /// Same node count and steps equal to 1e-12 relative.
  bool compatible(const TimeGrid& other) const noexcept;

 private:
  TimeGrid(double horizon, std::size_t count, double step);

  double horizon_;
  std::size_t count_;
  double step_;
};

/// Weighted discrete l^s norm on a spatial coordinate vector:
/// ||x|| = (weight * sum |x_j|^s)^(1/s).
struct SpaceMetric {
  double weight = 1.0;
  double exponent = 2.0;

  double norm(std::span<const double> x) const;
  /// weight * sum x_j y_j; only meaningful for exponent 2.
  double inner(std::span<const double> x, std::span<const double> y) const;

  friend bool operator==(const SpaceMetric&, const SpaceMetric&) = default;
};

/// Uniform cell-midpoint grid on [a, b].
class SpatialGrid {
 public:
  SpatialGrid(double lower, double upper, std::size_t count, double exponent = 2.0);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  std::size_t size() const noexcept { return count_; }
  double step() const noexcept { return step_; }
  double exponent() const noexcept { return exponent_; }
  double node(std::size_t j) const noexcept {
    return lower_ + (static_cast<double>(j) + 0.5) * step_;
  }
  std::vector<double> nodes() const;
  SpaceMetric metric() const noexcept { return {step_, exponent_}; }

 private:
  double lower_;
  double upper_;
  std::size_t count_;
  double step_;
  double exponent_;
};

/// Element of L^p(0,T;X) sampled on a TimeGrid. Values are stored row-major,
/// one row of `dim()` entries per time node.
class BochnerFunction {
 public:
  /// Zero function.
  BochnerFunction(TimeGrid grid, std::size_t dim, SpaceMetric metric, double exponent = 2.0);
  BochnerFunction(TimeGrid grid, std::size_t dim, SpaceMetric metric, double exponent,
                  std::vector<double> values);

  /// The constant-in-time function t -> x.
  static BochnerFunction constant(TimeGrid grid, std::span<const double> x, SpaceMetric metric,
                                  double exponent = 2.0);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  const SpaceMetric& metric() const noexcept { return metric_; }
  double exponent() const noexcept { return exponent_; }

  std::span<const double> at(std::size_t i) const;
  std::span<double> at(std::size_t i);
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Copy carrying a different time / space exponent (values untouched).
  BochnerFunction with_exponents(double time_exponent, double space_exponent) const;

  /// Throws InvalidInput if any entry is NaN or infinite.
  void require_finite() const;

  /// Same grid, dimension and spatial weight.
  bool same_shape(const BochnerFunction& other) const noexcept;

  BochnerFunction& operator+=(const BochnerFunction& other);
  BochnerFunction& operator-=(const BochnerFunction& other);
  BochnerFunction& operator*=(double c) noexcept;

  friend BochnerFunction operator+(BochnerFunction a, const BochnerFunction& b) { return a += b; }
  friend BochnerFunction operator-(BochnerFunction a, const BochnerFunction& b) { return a -= b; }
  friend BochnerFunction operator*(double c, BochnerFunction a) { return a *= c; }

 private:
  TimeGrid grid_;
  std::size_t dim_;
  SpaceMetric metric_;
  double exponent_;
  std::vector<double> values_;
};

/// (sum_i dt * ||u(t_i)||_X^p)^(1/p).
double bochner_norm(const BochnerFunction& u);

/// sum_i dt * <u(t_i), v(t_i)>_X; requires p = 2 and spatial exponent 2.
double bochner_inner(const BochnerFunction& u, const BochnerFunction& v);

struct HolderPairing {
  double pairing;  ///< discrete dual pairing of v and u
  double bound;    ///< ||u||_{p,s} * ||v||_{p*,s*}
};

/// Dual pairing of u in L^p(X) with v in L^{p*}(X*) and the Hoelder bound.
/// Both time and space exponents of v must be conjugate to those of u.
HolderPairing holder_pairing(const BochnerFunction& u, const BochnerFunction& v);

/// Number of grid steps a shift z snaps to; throws DomainError if z is
/// outside [0, T) or snaps to the full horizon.
std::size_t shift_steps(const TimeGrid& grid, double z);

/// (tau_z u)(t) = u(t + z) on the common domain; z snaps to the nearest grid
/// multiple k and the result has n_t - k nodes.
BochnerFunction translate(const BochnerFunction& u, double z);

/// Piecewise-constant interpolation of tracked snapshots, one per time node
/// (a single snapshot is held constant over [0, T]).
BochnerFunction interpolate_tracked(const std::vector<std::vector<double>>& snapshots,
                                    const TimeGrid& grid, SpaceMetric metric,
                                    double exponent = 2.0);

/// CSV with header `t,x_0,...,x_{n-1}`, one row per node, %.17g values.
std::string to_csv(const BochnerFunction& u);

/// Parses the CSV written by to_csv. When `grid` is omitted the time grid is
/// reconstructed from the t column.
BochnerFunction from_csv(std::string_view text, SpaceMetric metric, double exponent = 2.0,
                         std::optional<TimeGrid> grid = std::nullopt);

}  // namespace dynip
