#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dynip {

/// R^dim with the weighted inner product <u, v> = weight * sum_k u_k v_k.
/// Every discrete space in the library (X, Y, their Bochner spaces and the
/// per-time data sections) is of this form with a constant quadrature weight.
struct VectorSpace {
  std::size_t dim = 0;
  double weight = 1.0;

  double inner(std::span<const double> u, std::span<const double> v) const;
  double norm(std::span<const double> u) const;
};

/// Matrix-free linear map between two weighted spaces. `apply_adjoint` is the
/// adjoint for the weighted inner products, not the coordinate transpose.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual VectorSpace domain() const = 0;
  virtual VectorSpace codomain() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;

  std::vector<double> operator()(std::span<const double> x) const;
  std::vector<double> adjoint(std::span<const double> y) const;
};

/// Row-major coordinate matrix acting between weighted spaces.
class DenseMap final : public LinearMap {
 public:
  DenseMap(std::size_t rows, std::size_t cols, std::vector<double> entries,
           double domain_weight = 1.0, double codomain_weight = 1.0);

  VectorSpace domain() const override { return {cols_, domain_weight_}; }
  VectorSpace codomain() const override { return {rows_, codomain_weight_}; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

  double entry(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
  double domain_weight_;
  double codomain_weight_;
};

}  // namespace dynip
