#include "dynip/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dynip/errors.hpp"

namespace dynip {

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols) throw DimensionError("matrix-vector size mismatch");
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += data[r * cols + c] * x[c];
    y[r] = s;
  }
  return y;
}

namespace {

void guard(std::size_t rows, std::size_t cols) {
  if (rows != 0 && cols > kMaxDenseEntries / rows)
    throw ResourceError("dense assembly of " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " exceeds the entry guard");
}

}  // namespace

DenseMatrix assemble_dense(const LinearMap& map) {
  const auto in = map.domain();
  const auto out = map.codomain();
  guard(out.dim, in.dim);
  DenseMatrix m(out.dim, in.dim);
  const double scale = std::sqrt(out.weight / in.weight);
  std::vector<double> e(in.dim, 0.0);
  std::vector<double> col(out.dim);
  for (std::size_t c = 0; c < in.dim; ++c) {
    e[c] = 1.0;
    map.apply(e, col);
    e[c] = 0.0;
    for (std::size_t r = 0; r < out.dim; ++r) m(r, c) = scale * col[r];
  }
  return m;
}

DenseMatrix assemble_dense_adjoint(const LinearMap& map) {
  const auto in = map.domain();
  const auto out = map.codomain();
  guard(out.dim, in.dim);
  DenseMatrix m(out.dim, in.dim);
  const double scale = std::sqrt(in.weight / out.weight);
  std::vector<double> e(out.dim, 0.0);
  std::vector<double> row(in.dim);
  for (std::size_t r = 0; r < out.dim; ++r) {
    e[r] = 1.0;
    map.apply_adjoint(e, row);
    e[r] = 0.0;
    for (std::size_t c = 0; c < in.dim; ++c) m(r, c) = scale * row[c];
  }
  return m;
}

DenseMatrix assemble_dense(const OperatorFamily& family, std::size_t index) {
  return assemble_dense(FamilySlice(family, index));
}

DenseMatrix assemble_dense(const DynamicForward& forward) {
  return assemble_dense(SpaceTimeMap(forward));
}

SvdResult jacobi_svd(const DenseMatrix& input, bool want_vectors) {
  for (double v : input.data)
    if (!std::isfinite(v)) throw InvalidInput("matrix has non-finite entries");
  // Orthogonalize the columns of a tall matrix; a wide one is transposed
  // first, which swaps the roles of the singular vector sets.
  const bool wide = input.rows < input.cols;
  const DenseMatrix a = wide ? input.transposed() : input;
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;

  std::vector<std::vector<double>> u(n, std::vector<double>(m));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < m; ++r) u[c][r] = a(r, c);
  std::vector<std::vector<double>> v;
  if (want_vectors) {
    v.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) v[c][c] = 1.0;
  }

  constexpr double tol = 1e-15;
  constexpr int max_sweeps = 80;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          alpha += u[p][r] * u[p][r];
          beta += u[q][r] * u[q][r];
          gamma += u[p][r] * u[q][r];
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double cs = 1.0 / std::hypot(1.0, t);
        const double sn = cs * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double up = u[p][r];
          const double uq = u[q][r];
          u[p][r] = cs * up - sn * uq;
          u[q][r] = sn * up + cs * uq;
        }
        if (want_vectors) {
          for (std::size_t r = 0; r < n; ++r) {
            const double vp = v[p][r];
            const double vq = v[q][r];
            v[p][r] = cs * vp - sn * vq;
            v[q][r] = sn * vp + cs * vq;
          }
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (double x : u[c]) s += x * x;
    sigma[c] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult result;
  result.values.reserve(n);
  for (std::size_t k : order) result.values.push_back(sigma[k]);
  if (want_vectors) {
    // Right singular vectors of the input: V for a tall input, U / sigma for a
    // transposed wide one.
    const std::size_t dim = input.cols;
    DenseMatrix rv(dim, n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t c = order[k];
      for (std::size_t r = 0; r < dim; ++r) {
        if (!wide)
          rv(r, k) = v[c][r];
        else
          rv(r, k) = sigma[c] > 0.0 ? u[c][r] / sigma[c] : 0.0;
      }
    }
    result.right_vectors = std::move(rv);
  }
  return result;
}

std::vector<double> singular_values(const DenseMatrix& m) { return jacobi_svd(m).values; }

SpectrumReport make_spectrum_report(std::optional<std::size_t> index, SvdResult svd) {
  SpectrumReport report;
  report.time_index = index;
  report.singular_values = std::move(svd.values);
  report.right_vectors = std::move(svd.right_vectors);
  const auto& s = report.singular_values;
  const double smax = s.empty() ? 0.0 : s.front();
  const double smin = s.empty() ? 0.0 : s.back();
  if (smax > 0.0 && smin > 1e-3 * std::numeric_limits<double>::epsilon() * smax) {
    report.condition = smax / smin;
  } else {
    report.condition = std::numeric_limits<double>::infinity();
    report.rank_deficient = true;
  }
  return report;
}

SpectrumReport temporal_spectrum(const DynamicForward& forward, std::size_t index,
                                 bool want_vectors) {
  if (forward.kind() != CompositionKind::pointwise)
    throw Unsupported("frozen-time spectrum is undefined for causal compositions");
  if (index >= forward.grid().size()) throw DimensionError("time index out of range");
  return make_spectrum_report(index,
                              jacobi_svd(assemble_dense(forward.family(), index), want_vectors));
}

SpectrumReport stacked_spectrum(const DynamicForward& forward, bool want_vectors) {
  return make_spectrum_report(std::nullopt, jacobi_svd(assemble_dense(forward), want_vectors));
}

namespace {

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw InvalidInput("no radii given");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !std::isfinite(radii[k]))
      throw InvalidInput("radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw InvalidInput("radii must be ascending");
  }
}

}  // namespace

std::vector<TailRow> tail_mass(const std::vector<BochnerFunction>& images,
                               std::span<const double> radii, double q) {
  check_radii(radii);
  if (!(q >= 1.0)) throw InvalidInput("tail exponent must be at least 1");
  std::vector<TailRow> table;
  table.reserve(radii.size());
  for (double r : radii) {
    double sup = 0.0;
    for (const auto& f : images) {
      double mass = 0.0;
      for (std::size_t i = 0; i < f.grid().size(); ++i) {
        const double norm = f.metric().norm(f.at(i));
        if (norm > r) mass += f.grid().step() * (q == 1.0 ? norm : std::pow(norm, q));
      }
      sup = std::max(sup, mass);
    }
    table.push_back({r, sup});
  }
  return table;
}

std::vector<TailRow> integrability_tail(const DynamicForward& forward,
                                        const std::vector<BochnerFunction>& ensemble,
                                        std::span<const double> radii, double q) {
  if (ensemble.empty()) throw InvalidInput("empty ensemble");
  std::vector<BochnerFunction> images;
  images.reserve(ensemble.size());
  for (const auto& theta : ensemble) {
    if (bochner_norm(theta) > 1.0 + 1e-12) throw InvalidInput("ensemble member has norm above 1");
    images.push_back(forward.apply(theta));
  }
  return tail_mass(images, radii, q);
}

std::vector<ModulusRow> translation_modulus(const std::vector<BochnerFunction>& ensemble,
                                            std::span<const double> shifts) {
  if (ensemble.empty()) throw InvalidInput("empty ensemble");
  std::vector<ModulusRow> table;
  table.reserve(shifts.size());
  for (double z : shifts) {
    double sup = 0.0;
    for (const auto& f : ensemble) {
      const std::size_t k = shift_steps(f.grid(), z);
      const double steps = z / f.grid().step();
      if (std::abs(steps - static_cast<double>(k)) > 1e-9 * std::max(1.0, steps))
        throw DomainError("shift is not a multiple of the time step");
      if (k == 0) continue;
      const std::size_t n = f.grid().size() - k;
      std::vector<double> diff(f.values().begin() + static_cast<std::ptrdiff_t>(k * f.dim()),
                               f.values().end());
      for (std::size_t idx = 0; idx < diff.size(); ++idx) diff[idx] -= f.values()[idx];
      const BochnerFunction d(TimeGrid::from_step(f.grid().step(), n), f.dim(), f.metric(),
                              f.exponent(), std::move(diff));
      sup = std::max(sup, bochner_norm(d));
    }
    table.push_back({z, sup});
  }
  return table;
}

std::vector<BochnerFunction> unit_ensemble(const TimeGrid& grid, std::size_t dim,
                                           SpaceMetric metric, std::size_t count,
                                           std::uint64_t seed, bool constant_in_time) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<BochnerFunction> out;
  out.reserve(count);
  while (out.size() < count) {
    BochnerFunction f(grid, dim, metric);
    if (constant_in_time) {
      std::vector<double> x(dim);
      for (double& v : x) v = normal(rng);
      f = BochnerFunction::constant(grid, x, metric);
    } else {
      for (double& v : f.values()) v = normal(rng);
    }
    const double norm = bochner_norm(f);
    if (norm == 0.0) continue;
    f *= 1.0 / norm;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace dynip
