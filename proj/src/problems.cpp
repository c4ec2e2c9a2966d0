#include "dynip/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "dynip/errors.hpp"
#include "dynip/io.hpp"

namespace dynip {

namespace {

void require_sizes(std::size_t n_t, std::size_t n_x) {
  if (n_t == 0 || n_x == 0) throw InvalidParameter("problem sizes must be positive");
}

double bump(double x, double center) {
  const double d = x - center;
  return std::exp(-d * d / 0.02);
}

ProblemInstance assemble(std::string label, std::shared_ptr<const DynamicForward> forward,
                         SpatialGrid space, BochnerFunction truth, bool static_truth) {
  BochnerFunction data = forward->apply(truth);
  return ProblemInstance{std::move(label), std::move(forward), space, std::move(truth),
                         std::move(data), static_truth};
}

}  // namespace

ProblemInstance make_dct_analogue(std::size_t n_t, std::size_t n_x, double width,
                                  std::size_t window, double horizon) {
  require_sizes(n_t, n_x);
  if (window == 0 || window > n_x) throw InvalidParameter("window must lie in [1, n_x]");
  return make_dct_analogue(n_t, n_x, width, rotating_window(n_t, n_x, window), horizon);
}

ProblemInstance make_dct_analogue(std::size_t n_t, std::size_t n_x, double width,
                                  std::vector<std::vector<std::size_t>> pattern,
                                  double horizon) {
  require_sizes(n_t, n_x);
  if (!(width > 0.0)) throw InvalidParameter("smoothing width must be positive");
  if (pattern.size() != n_t) throw DimensionError("mask pattern needs one row per time node");
  const TimeGrid time(horizon, n_t);
  const SpatialGrid space(0.0, 1.0, n_x);
  const VectorSpace x_space{n_x, space.step()};
  auto family = compose(make_subsample_observer(std::move(pattern), x_space),
                        make_gaussian_smoothing(space, width));
  auto forward = std::make_shared<const DynamicForward>(time, std::move(family));

  BochnerFunction truth(time, n_x, space.metric());
  for (std::size_t i = 0; i < n_t; ++i) {
    const double center =
        space.lower() + (space.upper() - space.lower()) * (0.2 + 0.6 * time.node(i) / horizon);
    auto row = truth.at(i);
    for (std::size_t j = 0; j < n_x; ++j) row[j] = bump(space.node(j), center);
  }
  return assemble("dct", std::move(forward), space, std::move(truth), false);
}

ProblemInstance make_mpi_analogue(std::size_t n_t, std::size_t n_x, double decay,
                                  double horizon) {
  require_sizes(n_t, n_x);
  if (!(decay > 0.0)) throw InvalidParameter("kernel decay must be positive");
  const TimeGrid time(horizon, n_t);
  std::vector<double> samples(n_t);
  for (std::size_t k = 0; k < n_t; ++k)
    samples[k] = std::exp(-decay * static_cast<double>(k) * time.step());
  return make_mpi_analogue(n_t, n_x, std::move(samples), horizon);
}

ProblemInstance make_mpi_analogue(std::size_t n_t, std::size_t n_x,
                                  std::vector<double> samples, double horizon) {
  require_sizes(n_t, n_x);
  const TimeGrid time(horizon, n_t);
  const SpatialGrid space(0.0, 1.0, n_x);
  auto system = make_spatial_integral(space, time, [horizon](double x, double t) {
    return std::sin(2.0 * std::numbers::pi * (x + t / horizon));
  });
  auto forward = std::make_shared<const DynamicForward>(
      time, std::move(system), CompositionKind::accumulate_then_observe,
      make_causal_kernel(time, std::move(samples)));

  std::vector<double> c(n_x);
  for (std::size_t j = 0; j < n_x; ++j) c[j] = bump(space.node(j), 0.4);
  auto truth = BochnerFunction::constant(time, c, space.metric());
  return assemble("mpi", std::move(forward), space, std::move(truth), true);
}

ProblemInstance make_nonuniform_example(std::size_t n_t, std::size_t n_x, double width,
                                        double horizon) {
  require_sizes(n_t, n_x);
  const TimeGrid time(horizon, n_t);
  const SpatialGrid space(0.0, 1.0, n_x);
  const VectorSpace x_space{n_x, space.step()};
  auto family = compose(make_scaling_family(time, x_space), make_gaussian_smoothing(space, width));
  auto forward = std::make_shared<const DynamicForward>(time, std::move(family));

  std::vector<double> x(n_x);
  for (std::size_t j = 0; j < n_x; ++j) x[j] = bump(space.node(j), 0.5);
  auto truth = BochnerFunction::constant(time, x, space.metric());
  return assemble("nonuniform", std::move(forward), space, std::move(truth), true);
}

ProblemInstance make_identity_problem(std::size_t n_t, std::size_t n_x, double horizon) {
  require_sizes(n_t, n_x);
  const TimeGrid time(horizon, n_t);
  const SpatialGrid space(0.0, 1.0, n_x);
  auto forward = std::make_shared<const DynamicForward>(
      time, make_identity_family({n_x, space.step()}));
  BochnerFunction truth(time, n_x, space.metric());
  for (std::size_t i = 0; i < n_t; ++i) {
    auto row = truth.at(i);
    for (std::size_t j = 0; j < n_x; ++j)
      row[j] = std::sin(2.0 * std::numbers::pi * space.node(j)) *
               std::cos(std::numbers::pi * time.node(i) / horizon);
  }
  return assemble("identity", std::move(forward), space, std::move(truth), false);
}

BochnerFunction forward_data(const ProblemInstance& instance, const BochnerFunction& truth) {
  return instance.forward->apply(truth);
}

BochnerFunction add_noise(const BochnerFunction& y, const NoiseSpec& spec) {
  if (!(spec.level > 0.0) || !std::isfinite(spec.level))
    throw InvalidParameter("noise level must be positive");
  if (!(spec.fraction > 0.0) || !(spec.fraction <= 1.0))
    throw InvalidParameter("noise fraction must lie in (0, 1]");
  for (std::uint64_t attempt = 0; attempt <= 3; ++attempt) {
    std::mt19937_64 rng(spec.seed + attempt);
    std::normal_distribution<double> normal(0.0, 1.0);
    BochnerFunction e(y.grid(), y.dim(), y.metric(), y.exponent());
    for (double& v : e.values()) v = normal(rng);
    if (!spec.per_section) {
      const double norm = bochner_norm(e);
      if (norm == 0.0) continue;
      e *= spec.fraction * spec.level / norm;
      return y + e;
    }
    const std::size_t n = y.grid().size();
    const double target = spec.fraction * spec.level / std::sqrt(static_cast<double>(n));
    const double root_dt = std::sqrt(y.grid().step());
    bool degenerate = false;
    for (std::size_t i = 0; i < n && !degenerate; ++i) {
      auto row = e.at(i);
      const double norm = root_dt * y.metric().norm(row);
      if (norm == 0.0) degenerate = true;
      for (double& v : row) v *= target / norm;
    }
    if (!degenerate) return y + e;
  }
  throw InvalidInput("noise draw had zero norm after retries");
}

void export_instance(const std::filesystem::path& dir, const ProblemInstance& instance,
                     const BochnerFunction& noisy, const NoiseSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_csv(dir / "truth.csv", instance.truth);
  write_csv(dir / "data_clean.csv", instance.data);
  write_csv(dir / "data_noisy.csv", noisy);
  std::string meta;
  meta += "kind=" + instance.label + "\n";
  meta += "composition=" + std::string(to_string(instance.forward->kind())) + "\n";
  meta += "n_t=" + std::to_string(instance.forward->grid().size()) + "\n";
  meta += "n_x=" + std::to_string(instance.space.size()) + "\n";
  meta += "n_y=" + std::to_string(instance.forward->output_space().dim) + "\n";
  meta += "T=" + format_shortest(instance.forward->grid().horizon()) + "\n";
  meta += "delta=" + format_shortest(spec.level) + "\n";
  meta += "fraction=" + format_shortest(spec.fraction) + "\n";
  meta += "seed=" + std::to_string(spec.seed) + "\n";
  write_text_atomic(dir / "meta.txt", meta);
}

}  // namespace dynip
