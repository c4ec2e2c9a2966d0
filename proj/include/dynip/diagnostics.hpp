#pragma once

// Numerical ill-posedness probes.
//
// Operators are assembled densely with the quadrature weights folded in,
// M~ = W_Y^{1/2} M W_X^{-1/2}, so plain coordinate inner products (and hence
// singular values) agree with the weighted ones.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dynip/bochner.hpp"
#include "dynip/linear_map.hpp"
#include "dynip/operators.hpp"

namespace dynip {

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  ///< row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  DenseMatrix transposed() const;
  std::vector<double> multiply(std::span<const double> x) const;
};

/// Entry guard for dense assembly.
inline constexpr std::size_t kMaxDenseEntries = 2'000'000;

DenseMatrix assemble_dense(const LinearMap& map);
/// Assembly through apply_adjoint; equals the transpose of assemble_dense.
DenseMatrix assemble_dense_adjoint(const LinearMap& map);
DenseMatrix assemble_dense(const OperatorFamily& family, std::size_t index);
DenseMatrix assemble_dense(const DynamicForward& forward);

struct SvdResult {
  std::vector<double> values;                ///< descending
  std::optional<DenseMatrix> right_vectors;  ///< columns, matching `values`
};

/// One-sided (Hestenes) Jacobi SVD applied to M directly.
SvdResult jacobi_svd(const DenseMatrix& m, bool want_vectors = false);
std::vector<double> singular_values(const DenseMatrix& m);

struct SpectrumReport {
  std::optional<std::size_t> time_index;  ///< nullopt for the stacked operator
  std::vector<double> singular_values;    ///< descending
  double condition = 0.0;                 ///< +inf when rank deficient
  bool rank_deficient = false;
  std::optional<DenseMatrix> right_vectors;
};

/// Builds the report, flagging rank deficiency when
/// sigma_min <= 1e-3 * eps * sigma_max.
SpectrumReport make_spectrum_report(std::optional<std::size_t> index, SvdResult svd);

/// Frozen-time operator S(t_i) K; pointwise kind only.
SpectrumReport temporal_spectrum(const DynamicForward& forward, std::size_t index,
                                 bool want_vectors = false);
/// The full space-time operator.
SpectrumReport stacked_spectrum(const DynamicForward& forward, bool want_vectors = false);

struct TailRow {
  double radius;
  double tail;
};

/// For each radius r: sup_n sum_{i : ||f_n(t_i)|| > r} dt ||f_n(t_i)||^q with
/// f_n = F theta_n. Ensemble members must satisfy ||theta_n|| <= 1.
std::vector<TailRow> integrability_tail(const DynamicForward& forward,
                                        const std::vector<BochnerFunction>& ensemble,
                                        std::span<const double> radii, double q);

/// Same table for an ensemble that is already in the data space.
std::vector<TailRow> tail_mass(const std::vector<BochnerFunction>& images,
                               std::span<const double> radii, double q);

struct ModulusRow {
  double shift;
  double modulus;
};

/// sup over the ensemble of ||tau_z f - f|| on the overlap [0, T - z].
std::vector<ModulusRow> translation_modulus(const std::vector<BochnerFunction>& ensemble,
                                            std::span<const double> shifts);

/// Seeded unit-norm ensemble in L^2(0,T;X); constant in time or with
/// independent normal entries.
std::vector<BochnerFunction> unit_ensemble(const TimeGrid& grid, std::size_t dim,
                                           SpaceMetric metric, std::size_t count,
                                           std::uint64_t seed, bool constant_in_time);

}  // namespace dynip
