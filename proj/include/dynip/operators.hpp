#pragma once

// Time-indexed operator families S(t_i), K, A_t and the space-time forward
// maps built from them.
//
// Three causality patterns are supported:
//   pointwise                y(t) = A_t[theta(t)]
//   observe_then_accumulate  y(t) = A_t[B_[0,t] theta]
//   accumulate_then_observe  y(t) = B_[0,t][A_. theta]
// where B_[0,t] is a causal convolution in time. The names follow the order
// in which the factors are written.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dynip/bochner.hpp"
#include "dynip/linear_map.hpp"

namespace dynip {

/// Family of linear maps X -> Y indexed by time node. Implementations are
/// immutable after construction, so concurrent applies are safe.
class OperatorFamily {
 public:
  virtual ~OperatorFamily() = default;

  virtual VectorSpace input_space() const = 0;
  virtual VectorSpace output_space() const = 0;
  /// Number of time nodes the family is defined on; nullopt if time-invariant.
  virtual std::optional<std::size_t> time_count() const { return std::nullopt; }
  /// Declared uniform bound c_S on ||apply(i, .)||, if one exists.
  virtual std::optional<double> norm_bound() const { return std::nullopt; }

  void apply(std::size_t i, std::span<const double> x, std::span<double> y) const;
  void apply_adjoint(std::size_t i, std::span<const double> y, std::span<double> x) const;
  std::vector<double> apply(std::size_t i, std::span<const double> x) const;
  std::vector<double> apply_adjoint(std::size_t i, std::span<const double> y) const;

 private:
  virtual void do_apply(std::size_t i, std::span<const double> x, std::span<double> y) const = 0;
  virtual void do_apply_adjoint(std::size_t i, std::span<const double> y,
                                std::span<double> x) const = 0;
  void check(std::size_t i, std::size_t in, std::size_t out) const;
};

using FamilyPtr = std::shared_ptr<const OperatorFamily>;

/// Identity on `space`.
FamilyPtr make_identity_family(VectorSpace space);

/// (Kx)_i = sum_j dx * exp(-(x_i - x_j)^2 / (2 width^2)) * x_j; self-adjoint.
FamilyPtr make_gaussian_smoothing(const SpatialGrid& grid, double width);

/// S(t_i) keeps the listed components and zeroes the rest. One index set per
/// time node; masking is its own adjoint and c_S = 1.
FamilyPtr make_subsample_observer(std::vector<std::vector<std::size_t>> pattern,
                                  VectorSpace space);

/// Window of `width` components starting at i mod n and wrapping around.
std::vector<std::vector<std::size_t>> rotating_window(std::size_t time_count, std::size_t n,
                                                      std::size_t width);

/// S(t_i) = (1 / t_i) Id. No uniform bound is attached.
FamilyPtr make_scaling_family(const TimeGrid& grid, VectorSpace space);

/// (A_i x) = sum_m dx * s(x_m, t_i) * x_m, a scalar per time node.
FamilyPtr make_spatial_integral(const SpatialGrid& space, const TimeGrid& time,
                                const std::function<double(double, double)>& weight);

/// Time-invariant family given by a coordinate matrix.
FamilyPtr make_dense_family(std::size_t rows, std::size_t cols, std::vector<double> entries,
                            VectorSpace input, VectorSpace output);

/// outer(i) o inner(i).
FamilyPtr compose(FamilyPtr outer, FamilyPtr inner);

/// One member of a family, A_i : X -> Y, as a LinearMap.
class FamilySlice final : public LinearMap {
 public:
  FamilySlice(const OperatorFamily& family, std::size_t index) : family_(family), index_(index) {}
  VectorSpace domain() const override { return family_.input_space(); }
  VectorSpace codomain() const override { return family_.output_space(); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    family_.apply(index_, x, y);
  }
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
    family_.apply_adjoint(index_, y, x);
  }

 private:
  const OperatorFamily& family_;
  std::size_t index_;
};

/// Discrete causal convolution (B g)(t_i) = sum_{j<=i} dt * a((i-j) dt) * g(t_j)
/// with the kernel sampled at the grid lags.
class CausalKernel {
 public:
  CausalKernel(TimeGrid grid, std::vector<double> samples);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> samples() const noexcept { return samples_; }

  /// Apply B to n_t rows of `dim` entries (row-major).
  void accumulate(std::span<const double> g, std::size_t dim, std::span<double> out) const;
  /// (B* h)(t_j) = sum_{i>=j} dt * a((i-j) dt) * h(t_i).
  void accumulate_adjoint(std::span<const double> h, std::size_t dim,
                          std::span<double> out) const;
  /// sum_{k<=i} dt * a(k dt): the response at t_i to a constant unit input.
  double cumulative(std::size_t i) const;

 private:
  TimeGrid grid_;
  std::vector<double> samples_;
};

CausalKernel make_causal_kernel(const TimeGrid& grid, std::vector<double> samples);

enum class CompositionKind { pointwise, observe_then_accumulate, accumulate_then_observe };

std::string_view to_string(CompositionKind kind);

/// Space-time forward operator F : L^2(0,T;X) -> L^2(0,T;Y).
class DynamicForward {
 public:
  /// Pointwise kind y(t_i) = A_i theta(t_i).
  DynamicForward(TimeGrid grid, FamilyPtr family);
  /// Causal kinds.
  DynamicForward(TimeGrid grid, FamilyPtr family, CompositionKind kind, CausalKernel kernel);

  CompositionKind kind() const noexcept { return kind_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const OperatorFamily& family() const noexcept { return *family_; }
  const FamilyPtr& family_ptr() const noexcept { return family_; }
  const std::optional<CausalKernel>& kernel() const noexcept { return kernel_; }

  VectorSpace input_space() const { return family_->input_space(); }
  VectorSpace output_space() const { return family_->output_space(); }
  /// Flattened Bochner spaces, weight dt times the spatial weight.
  VectorSpace domain() const;
  VectorSpace codomain() const;

  void apply(std::span<const double> theta, std::span<double> y) const;
  void apply_adjoint(std::span<const double> y, std::span<double> theta) const;
  BochnerFunction apply(const BochnerFunction& theta) const;
  BochnerFunction apply_adjoint(const BochnerFunction& y) const;

  /// y(t_i) from the full unknown, without evaluating other nodes.
  void apply_row(std::size_t i, std::span<const double> theta, std::span<double> yi) const;
  /// Adjoint of apply_row for the section weight dt * w_Y.
  void apply_row_adjoint(std::size_t i, std::span<const double> h,
                         std::span<double> theta) const;

 private:
  void check_input(const BochnerFunction& u, std::size_t dim) const;

  TimeGrid grid_;
  FamilyPtr family_;
  CompositionKind kind_;
  std::optional<CausalKernel> kernel_;
};

/// F viewed as a LinearMap on flattened space-time coordinates.
class SpaceTimeMap final : public LinearMap {
 public:
  explicit SpaceTimeMap(const DynamicForward& forward) : forward_(forward) {}
  VectorSpace domain() const override { return forward_.domain(); }
  VectorSpace codomain() const override { return forward_.codomain(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

 private:
  const DynamicForward& forward_;
};

/// F o iota: a static source x in X, held constant in time, to space-time data.
class StaticSourceMap final : public LinearMap {
 public:
  explicit StaticSourceMap(const DynamicForward& forward) : forward_(forward) {}
  VectorSpace domain() const override { return forward_.input_space(); }
  VectorSpace codomain() const override { return forward_.codomain(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

 private:
  const DynamicForward& forward_;
};

/// The data section at node i, F_i : unknown -> Y, with section weight
/// dt * w_Y. The unknown is either the full space-time function or a static
/// source.
class SectionMap final : public LinearMap {
 public:
  SectionMap(std::shared_ptr<const DynamicForward> forward, std::size_t index,
             bool static_source);
  VectorSpace domain() const override;
  VectorSpace codomain() const override;
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

 private:
  std::shared_ptr<const DynamicForward> forward_;
  std::size_t index_;
  bool static_source_;
};

/// iota*(u) = sum_i dt * u(t_i): adjoint of the constant-in-time embedding.
std::vector<double> time_integral(const BochnerFunction& u);

}  // namespace dynip
