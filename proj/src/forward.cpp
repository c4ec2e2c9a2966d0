#include <algorithm>

#include "dynip/errors.hpp"
#include "dynip/operators.hpp"

namespace dynip {

DynamicForward::DynamicForward(TimeGrid grid, FamilyPtr family)
    : grid_(grid), family_(std::move(family)), kind_(CompositionKind::pointwise) {
  if (!family_) throw InvalidInput("null operator family");
  if (auto n = family_->time_count(); n && *n != grid_.size())
    throw DimensionError("operator family and time grid have different node counts");
}

DynamicForward::DynamicForward(TimeGrid grid, FamilyPtr family, CompositionKind kind,
                               CausalKernel kernel)
    : DynamicForward(grid, std::move(family)) {
  if (kind == CompositionKind::pointwise)
    throw InvalidInput("pointwise composition takes no causal kernel");
  if (!kernel.grid().compatible(grid_))
    throw DimensionError("causal kernel sampled on a different time grid");
  kind_ = kind;
  kernel_ = std::move(kernel);
}

VectorSpace DynamicForward::domain() const {
  const auto x = input_space();
  return {grid_.size() * x.dim, grid_.step() * x.weight};
}

VectorSpace DynamicForward::codomain() const {
  const auto y = output_space();
  return {grid_.size() * y.dim, grid_.step() * y.weight};
}

void DynamicForward::apply(std::span<const double> theta, std::span<double> y) const {
  const std::size_t n = grid_.size();
  const std::size_t nx = input_space().dim;
  const std::size_t ny = output_space().dim;
  if (theta.size() != n * nx || y.size() != n * ny)
    throw DimensionError("space-time vector does not match forward operator");
  switch (kind_) {
    case CompositionKind::pointwise:
      for (std::size_t i = 0; i < n; ++i)
        family_->apply(i, theta.subspan(i * nx, nx), y.subspan(i * ny, ny));
      break;
    case CompositionKind::observe_then_accumulate: {
      std::vector<double> w(n * nx);
      kernel_->accumulate(theta, nx, w);
      for (std::size_t i = 0; i < n; ++i)
        family_->apply(i, std::span<const double>(w).subspan(i * nx, nx), y.subspan(i * ny, ny));
      break;
    }
    case CompositionKind::accumulate_then_observe: {
      std::vector<double> g(n * ny);
      for (std::size_t j = 0; j < n; ++j)
        family_->apply(j, theta.subspan(j * nx, nx), std::span<double>(g).subspan(j * ny, ny));
      kernel_->accumulate(g, ny, y);
      break;
    }
  }
}

void DynamicForward::apply_adjoint(std::span<const double> y, std::span<double> theta) const {
  const std::size_t n = grid_.size();
  const std::size_t nx = input_space().dim;
  const std::size_t ny = output_space().dim;
  if (theta.size() != n * nx || y.size() != n * ny)
    throw DimensionError("space-time vector does not match forward operator");
  switch (kind_) {
    case CompositionKind::pointwise:
      for (std::size_t i = 0; i < n; ++i)
        family_->apply_adjoint(i, y.subspan(i * ny, ny), theta.subspan(i * nx, nx));
      break;
    case CompositionKind::observe_then_accumulate: {
      std::vector<double> z(n * nx);
      for (std::size_t i = 0; i < n; ++i)
        family_->apply_adjoint(i, y.subspan(i * ny, ny), std::span<double>(z).subspan(i * nx, nx));
      kernel_->accumulate_adjoint(z, nx, theta);
      break;
    }
    case CompositionKind::accumulate_then_observe: {
      std::vector<double> z(n * ny);
      kernel_->accumulate_adjoint(y, ny, z);
      for (std::size_t j = 0; j < n; ++j)
        family_->apply_adjoint(j, std::span<const double>(z).subspan(j * ny, ny),
                               theta.subspan(j * nx, nx));
      break;
    }
  }
}

void DynamicForward::check_input(const BochnerFunction& u, std::size_t dim) const {
  if (!u.grid().compatible(grid_)) throw DimensionError("function lives on a different time grid");
  if (u.dim() != dim) throw DimensionError("function has the wrong spatial dimension");
}

BochnerFunction DynamicForward::apply(const BochnerFunction& theta) const {
  check_input(theta, input_space().dim);
  const auto out = output_space();
  BochnerFunction y(grid_, out.dim, {out.weight, 2.0}, theta.exponent());
  apply(theta.values(), y.values());
  return y;
}

BochnerFunction DynamicForward::apply_adjoint(const BochnerFunction& y) const {
  check_input(y, output_space().dim);
  const auto in = input_space();
  BochnerFunction theta(grid_, in.dim, {in.weight, 2.0}, y.exponent());
  apply_adjoint(y.values(), theta.values());
  return theta;
}

void DynamicForward::apply_row(std::size_t i, std::span<const double> theta,
                               std::span<double> yi) const {
  const std::size_t n = grid_.size();
  const std::size_t nx = input_space().dim;
  const std::size_t ny = output_space().dim;
  if (i >= n || theta.size() != n * nx || yi.size() != ny)
    throw DimensionError("section apply size mismatch");
  const double dt = grid_.step();
  switch (kind_) {
    case CompositionKind::pointwise:
      family_->apply(i, theta.subspan(i * nx, nx), yi);
      break;
    case CompositionKind::observe_then_accumulate: {
      std::vector<double> w(nx, 0.0);
      for (std::size_t j = 0; j <= i; ++j) {
        const double c = dt * kernel_->samples()[i - j];
        for (std::size_t k = 0; k < nx; ++k) w[k] += c * theta[j * nx + k];
      }
      family_->apply(i, w, yi);
      break;
    }
    case CompositionKind::accumulate_then_observe: {
      std::fill(yi.begin(), yi.end(), 0.0);
      std::vector<double> g(ny);
      for (std::size_t j = 0; j <= i; ++j) {
        family_->apply(j, theta.subspan(j * nx, nx), g);
        const double c = dt * kernel_->samples()[i - j];
        for (std::size_t k = 0; k < ny; ++k) yi[k] += c * g[k];
      }
      break;
    }
  }
}

void DynamicForward::apply_row_adjoint(std::size_t i, std::span<const double> h,
                                       std::span<double> theta) const {
  const std::size_t n = grid_.size();
  const std::size_t nx = input_space().dim;
  const std::size_t ny = output_space().dim;
  if (i >= n || theta.size() != n * nx || h.size() != ny)
    throw DimensionError("section adjoint size mismatch");
  const double dt = grid_.step();
  std::fill(theta.begin(), theta.end(), 0.0);
  switch (kind_) {
    case CompositionKind::pointwise:
      family_->apply_adjoint(i, h, theta.subspan(i * nx, nx));
      break;
    case CompositionKind::observe_then_accumulate: {
      const auto z = family_->apply_adjoint(i, h);
      for (std::size_t j = 0; j <= i; ++j) {
        const double c = dt * kernel_->samples()[i - j];
        for (std::size_t k = 0; k < nx; ++k) theta[j * nx + k] = c * z[k];
      }
      break;
    }
    case CompositionKind::accumulate_then_observe:
      for (std::size_t j = 0; j <= i; ++j) {
        auto tj = theta.subspan(j * nx, nx);
        family_->apply_adjoint(j, h, tj);
        const double c = dt * kernel_->samples()[i - j];
        for (double& v : tj) v *= c;
      }
      break;
  }
}

// LinearMap views

void SpaceTimeMap::apply(std::span<const double> x, std::span<double> y) const {
  forward_.apply(x, y);
}

void SpaceTimeMap::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  forward_.apply_adjoint(y, x);
}

void StaticSourceMap::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = forward_.grid().size();
  const std::size_t nx = forward_.input_space().dim;
  if (x.size() != nx) throw DimensionError("static source has the wrong dimension");
  std::vector<double> theta(n * nx);
  for (std::size_t i = 0; i < n; ++i) std::copy(x.begin(), x.end(), theta.begin() + i * nx);
  forward_.apply(theta, y);
}

void StaticSourceMap::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  const std::size_t n = forward_.grid().size();
  const std::size_t nx = forward_.input_space().dim;
  if (x.size() != nx) throw DimensionError("static source has the wrong dimension");
  std::vector<double> theta(n * nx);
  forward_.apply_adjoint(y, theta);
  std::fill(x.begin(), x.end(), 0.0);
  const double dt = forward_.grid().step();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < nx; ++k) x[k] += dt * theta[i * nx + k];
}

SectionMap::SectionMap(std::shared_ptr<const DynamicForward> forward, std::size_t index,
                       bool static_source)
    : forward_(std::move(forward)), index_(index), static_source_(static_source) {
  if (!forward_) throw InvalidInput("null forward operator");
  if (index_ >= forward_->grid().size()) throw DimensionError("section index out of range");
}

VectorSpace SectionMap::domain() const {
  return static_source_ ? forward_->input_space() : forward_->domain();
}

VectorSpace SectionMap::codomain() const {
  const auto y = forward_->output_space();
  return {y.dim, forward_->grid().step() * y.weight};
}

void SectionMap::apply(std::span<const double> x, std::span<double> y) const {
  if (!static_source_) {
    forward_->apply_row(index_, x, y);
    return;
  }
  const std::size_t n = forward_->grid().size();
  const std::size_t nx = forward_->input_space().dim;
  if (x.size() != nx) throw DimensionError("static source has the wrong dimension");
  std::vector<double> theta(n * nx);
  for (std::size_t i = 0; i <= index_; ++i) std::copy(x.begin(), x.end(), theta.begin() + i * nx);
  forward_->apply_row(index_, theta, y);
}

void SectionMap::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  if (!static_source_) {
    forward_->apply_row_adjoint(index_, y, x);
    return;
  }
  const std::size_t n = forward_->grid().size();
  const std::size_t nx = forward_->input_space().dim;
  if (x.size() != nx) throw DimensionError("static source has the wrong dimension");
  std::vector<double> theta(n * nx);
  forward_->apply_row_adjoint(index_, y, theta);
  // iota* with the dt of the Bochner weight.
  std::fill(x.begin(), x.end(), 0.0);
  const double dt = forward_->grid().step();
  for (std::size_t i = 0; i <= index_; ++i)
    for (std::size_t k = 0; k < nx; ++k) x[k] += dt * theta[i * nx + k];
}

std::vector<double> time_integral(const BochnerFunction& u) {
  std::vector<double> x(u.dim(), 0.0);
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    auto ui = u.at(i);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += u.grid().step() * ui[k];
  }
  return x;
}

}  // namespace dynip
