#include "dynip/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynip/errors.hpp"

namespace dynip {

// VectorSpace / LinearMap

double VectorSpace::inner(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != dim || v.size() != dim) throw DimensionError("vector does not match space");
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s += u[k] * v[k];
  return weight * s;
}

double VectorSpace::norm(std::span<const double> u) const { return std::sqrt(inner(u, u)); }

std::vector<double> LinearMap::operator()(std::span<const double> x) const {
  std::vector<double> y(codomain().dim);
  apply(x, y);
  return y;
}

std::vector<double> LinearMap::adjoint(std::span<const double> y) const {
  std::vector<double> x(domain().dim);
  apply_adjoint(y, x);
  return x;
}

DenseMap::DenseMap(std::size_t rows, std::size_t cols, std::vector<double> entries,
                   double domain_weight, double codomain_weight)
    : rows_(rows),
      cols_(cols),
      entries_(std::move(entries)),
      domain_weight_(domain_weight),
      codomain_weight_(codomain_weight) {
  if (entries_.size() != rows_ * cols_) throw DimensionError("matrix entry count mismatch");
  if (!(domain_weight > 0.0) || !(codomain_weight > 0.0))
    throw InvalidParameter("space weights must be positive");
}

void DenseMap::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw DimensionError("matrix-vector size mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += entries_[r * cols_ + c] * x[c];
    y[r] = s;
  }
}

void DenseMap::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  if (x.size() != cols_ || y.size() != rows_) throw DimensionError("matrix-vector size mismatch");
  const double scale = codomain_weight_ / domain_weight_;
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) x[c] += entries_[r * cols_ + c] * y[r];
  for (double& v : x) v *= scale;
}

// OperatorFamily

void OperatorFamily::check(std::size_t i, std::size_t in, std::size_t out) const {
  if (in != input_space().dim || out != output_space().dim)
    throw DimensionError("operator family applied to vector of wrong size");
  if (auto n = time_count(); n && i >= *n)
    throw DimensionError("time index " + std::to_string(i) + " outside operator family");
}

void OperatorFamily::apply(std::size_t i, std::span<const double> x, std::span<double> y) const {
  check(i, x.size(), y.size());
  do_apply(i, x, y);
}

void OperatorFamily::apply_adjoint(std::size_t i, std::span<const double> y,
                                   std::span<double> x) const {
  check(i, x.size(), y.size());
  do_apply_adjoint(i, y, x);
}

std::vector<double> OperatorFamily::apply(std::size_t i, std::span<const double> x) const {
  std::vector<double> y(output_space().dim);
  apply(i, x, y);
  return y;
}

std::vector<double> OperatorFamily::apply_adjoint(std::size_t i,
                                                  std::span<const double> y) const {
  std::vector<double> x(input_space().dim);
  apply_adjoint(i, y, x);
  return x;
}

namespace {

class IdentityFamily final : public OperatorFamily {
 public:
  explicit IdentityFamily(VectorSpace space) : space_(space) {}
  VectorSpace input_space() const override { return space_; }
  VectorSpace output_space() const override { return space_; }
  std::optional<double> norm_bound() const override { return 1.0; }

 private:
  void do_apply(std::size_t, std::span<const double> x, std::span<double> y) const override {
    std::copy(x.begin(), x.end(), y.begin());
  }
  void do_apply_adjoint(std::size_t, std::span<const double> y,
                        std::span<double> x) const override {
    std::copy(y.begin(), y.end(), x.begin());
  }

  VectorSpace space_;
};

// Time-invariant coordinate matrix between weighted spaces.
class MatrixFamily final : public OperatorFamily {
 public:
  MatrixFamily(std::size_t rows, std::size_t cols, std::vector<double> entries, VectorSpace in,
               VectorSpace out, std::optional<double> bound)
      : map_(rows, cols, std::move(entries), in.weight, out.weight),
        in_(in),
        out_(out),
        bound_(bound) {
    if (in.dim != cols || out.dim != rows) throw DimensionError("matrix does not fit spaces");
  }
  VectorSpace input_space() const override { return in_; }
  VectorSpace output_space() const override { return out_; }
  std::optional<double> norm_bound() const override { return bound_; }

 private:
  void do_apply(std::size_t, std::span<const double> x, std::span<double> y) const override {
    map_.apply(x, y);
  }
  void do_apply_adjoint(std::size_t, std::span<const double> y,
                        std::span<double> x) const override {
    map_.apply_adjoint(y, x);
  }

  DenseMap map_;
  VectorSpace in_;
  VectorSpace out_;
  std::optional<double> bound_;
};

class SubsampleObserver final : public OperatorFamily {
 public:
  SubsampleObserver(std::vector<std::vector<std::size_t>> pattern, VectorSpace space)
      : space_(space) {
    if (pattern.empty()) throw InvalidParameter("observer pattern has no time nodes");
    masks_.reserve(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (pattern[i].empty())
        throw InvalidParameter("observer keeps no component at time index " +
                               std::to_string(i));
      std::vector<char> mask(space.dim, 0);
      for (std::size_t k : pattern[i]) {
        if (k >= space.dim) throw InvalidParameter("observer index out of range");
        mask[k] = 1;
      }
      masks_.push_back(std::move(mask));
    }
  }
  VectorSpace input_space() const override { return space_; }
  VectorSpace output_space() const override { return space_; }
  std::optional<std::size_t> time_count() const override { return masks_.size(); }
  std::optional<double> norm_bound() const override { return 1.0; }

 private:
  void do_apply(std::size_t i, std::span<const double> x, std::span<double> y) const override {
    const auto& mask = masks_[i];
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = mask[k] ? x[k] : 0.0;
  }
  void do_apply_adjoint(std::size_t i, std::span<const double> y,
                        std::span<double> x) const override {
    do_apply(i, y, x);
  }

  VectorSpace space_;
  std::vector<std::vector<char>> masks_;
};

class ScalingFamily final : public OperatorFamily {
 public:
  ScalingFamily(const TimeGrid& grid, VectorSpace space) : factors_(grid.size()), space_(space) {
    for (std::size_t i = 0; i < grid.size(); ++i) factors_[i] = 1.0 / grid.node(i);
  }
  VectorSpace input_space() const override { return space_; }
  VectorSpace output_space() const override { return space_; }
  std::optional<std::size_t> time_count() const override { return factors_.size(); }

 private:
  void do_apply(std::size_t i, std::span<const double> x, std::span<double> y) const override {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = factors_[i] * x[k];
  }
  void do_apply_adjoint(std::size_t i, std::span<const double> y,
                        std::span<double> x) const override {
    do_apply(i, y, x);
  }

  std::vector<double> factors_;
  VectorSpace space_;
};

class SpatialIntegral final : public OperatorFamily {
 public:
  SpatialIntegral(const SpatialGrid& space, const TimeGrid& time,
                  const std::function<double(double, double)>& weight)
      : rows_(time.size() * space.size()), nx_(space.size()), dx_(space.step()) {
    for (std::size_t i = 0; i < time.size(); ++i)
      for (std::size_t m = 0; m < nx_; ++m) rows_[i * nx_ + m] = weight(space.node(m), time.node(i));
  }
  VectorSpace input_space() const override { return {nx_, dx_}; }
  VectorSpace output_space() const override { return {1, 1.0}; }
  std::optional<std::size_t> time_count() const override { return rows_.size() / nx_; }

 private:
  void do_apply(std::size_t i, std::span<const double> x, std::span<double> y) const override {
    double s = 0.0;
    for (std::size_t m = 0; m < nx_; ++m) s += dx_ * rows_[i * nx_ + m] * x[m];
    y[0] = s;
  }
  // Adjoint coefficient (w_Y / w_X) * dx * s = s.
  void do_apply_adjoint(std::size_t i, std::span<const double> y,
                        std::span<double> x) const override {
    for (std::size_t m = 0; m < nx_; ++m) x[m] = rows_[i * nx_ + m] * y[0];
  }

  std::vector<double> rows_;
  std::size_t nx_;
  double dx_;
};

class ComposedFamily final : public OperatorFamily {
 public:
  ComposedFamily(FamilyPtr outer, FamilyPtr inner)
      : outer_(std::move(outer)), inner_(std::move(inner)) {
    if (!outer_ || !inner_) throw InvalidInput("null operator family");
    const auto mid_out = inner_->output_space();
    const auto mid_in = outer_->input_space();
    if (mid_out.dim != mid_in.dim || mid_out.weight != mid_in.weight)
      throw DimensionError("composed families do not share the intermediate space");
    const auto a = outer_->time_count();
    const auto b = inner_->time_count();
    if (a && b && *a != *b) throw DimensionError("composed families cover different time grids");
    count_ = a ? a : b;
  }
  VectorSpace input_space() const override { return inner_->input_space(); }
  VectorSpace output_space() const override { return outer_->output_space(); }
  std::optional<std::size_t> time_count() const override { return count_; }
  std::optional<double> norm_bound() const override {
    auto a = outer_->norm_bound();
    auto b = inner_->norm_bound();
    if (a && b) return *a * *b;
    return std::nullopt;
  }

 private:
  void do_apply(std::size_t i, std::span<const double> x, std::span<double> y) const override {
    std::vector<double> mid(inner_->output_space().dim);
    inner_->apply(i, x, mid);
    outer_->apply(i, mid, y);
  }
  void do_apply_adjoint(std::size_t i, std::span<const double> y,
                        std::span<double> x) const override {
    std::vector<double> mid(inner_->output_space().dim);
    outer_->apply_adjoint(i, y, mid);
    inner_->apply_adjoint(i, mid, x);
  }

  FamilyPtr outer_;
  FamilyPtr inner_;
  std::optional<std::size_t> count_;
};

}  // namespace

FamilyPtr make_identity_family(VectorSpace space) {
  if (space.dim == 0 || !(space.weight > 0.0)) throw InvalidParameter("invalid identity space");
  return std::make_shared<IdentityFamily>(space);
}

FamilyPtr make_gaussian_smoothing(const SpatialGrid& grid, double width) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw InvalidParameter("smoothing width must be positive");
  const std::size_t n = grid.size();
  const double dx = grid.step();
  std::vector<double> m(n * n);
  double max_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = grid.node(i) - grid.node(j);
      m[i * n + j] = dx * std::exp(-d * d / (2.0 * width * width));
      row += m[i * n + j];
    }
    max_row = std::max(max_row, row);
  }
  // Symmetric: the spectral norm is bounded by the max absolute row sum.
  const VectorSpace space{n, dx};
  return std::make_shared<MatrixFamily>(n, n, std::move(m), space, space, max_row);
}

FamilyPtr make_subsample_observer(std::vector<std::vector<std::size_t>> pattern,
                                  VectorSpace space) {
  return std::make_shared<SubsampleObserver>(std::move(pattern), space);
}

std::vector<std::vector<std::size_t>> rotating_window(std::size_t time_count, std::size_t n,
                                                      std::size_t width) {
  if (width == 0 || width > n) throw InvalidParameter("window width must lie in [1, n]");
  std::vector<std::vector<std::size_t>> pattern(time_count);
  for (std::size_t i = 0; i < time_count; ++i)
    for (std::size_t k = 0; k < width; ++k) pattern[i].push_back((i + k) % n);
  return pattern;
}

FamilyPtr make_scaling_family(const TimeGrid& grid, VectorSpace space) {
  return std::make_shared<ScalingFamily>(grid, space);
}

FamilyPtr make_spatial_integral(const SpatialGrid& space, const TimeGrid& time,
                                const std::function<double(double, double)>& weight) {
  return std::make_shared<SpatialIntegral>(space, time, weight);
}

FamilyPtr make_dense_family(std::size_t rows, std::size_t cols, std::vector<double> entries,
                            VectorSpace input, VectorSpace output) {
  return std::make_shared<MatrixFamily>(rows, cols, std::move(entries), input, output,
                                        std::nullopt);
}

FamilyPtr compose(FamilyPtr outer, FamilyPtr inner) {
  return std::make_shared<ComposedFamily>(std::move(outer), std::move(inner));
}

// CausalKernel

CausalKernel::CausalKernel(TimeGrid grid, std::vector<double> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw DimensionError("causal kernel needs one sample per time node");
  for (double a : samples_)
    if (!std::isfinite(a)) throw InvalidInput("causal kernel has non-finite samples");
}

void CausalKernel::accumulate(std::span<const double> g, std::size_t dim,
                              std::span<double> out) const {
  const std::size_t n = grid_.size();
  if (g.size() != n * dim || out.size() != n * dim)
    throw DimensionError("causal convolution input size mismatch");
  const double dt = grid_.step();
  for (std::size_t i = 0; i < n; ++i) {
    auto yi = out.subspan(i * dim, dim);
    std::fill(yi.begin(), yi.end(), 0.0);
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = dt * samples_[i - j];
      for (std::size_t k = 0; k < dim; ++k) yi[k] += c * g[j * dim + k];
    }
  }
}

void CausalKernel::accumulate_adjoint(std::span<const double> h, std::size_t dim,
                                      std::span<double> out) const {
  const std::size_t n = grid_.size();
  if (h.size() != n * dim || out.size() != n * dim)
    throw DimensionError("causal convolution input size mismatch");
  const double dt = grid_.step();
  for (std::size_t j = 0; j < n; ++j) {
    auto xj = out.subspan(j * dim, dim);
    std::fill(xj.begin(), xj.end(), 0.0);
    for (std::size_t i = j; i < n; ++i) {
      const double c = dt * samples_[i - j];
      for (std::size_t k = 0; k < dim; ++k) xj[k] += c * h[i * dim + k];
    }
  }
}

double CausalKernel::cumulative(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = 0; k <= i; ++k) s += grid_.step() * samples_[k];
  return s;
}

CausalKernel make_causal_kernel(const TimeGrid& grid, std::vector<double> samples) {
  return CausalKernel(grid, std::move(samples));
}

std::string_view to_string(CompositionKind kind) {
  switch (kind) {
    case CompositionKind::pointwise:
      return "pointwise";
    case CompositionKind::observe_then_accumulate:
      return "observe_then_accumulate";
    case CompositionKind::accumulate_then_observe:
      return "accumulate_then_observe";
  }
  return "unknown";
}

}  // namespace dynip
