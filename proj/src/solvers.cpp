#include "dynip/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "dynip/errors.hpp"

namespace dynip {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::discrepancy:
      return "discrepancy";
    case StopReason::max_iter:
      return "max_iter";
    case StopReason::tolerance:
      return "tolerance";
  }
  return "unknown";
}

std::vector<double> coordinates(const SolveReport& report) {
  if (const auto* f = std::get_if<BochnerFunction>(&report.reconstruction))
    return {f->values().begin(), f->values().end()};
  return std::get<std::vector<double>>(report.reconstruction);
}

double choose_alpha(const ParameterRule& rule, double delta, double data_exponent) {
  if (!(rule.scale > 0.0) || !std::isfinite(rule.scale))
    throw InvalidParameter("rule scale must be positive");
  if (!(rule.exponent > 0.0) || !(rule.exponent < data_exponent))
    throw InvalidParameter("rule exponent must lie strictly between 0 and the data exponent");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw InvalidParameter("noise level must be positive");
  return rule.scale * std::pow(delta, rule.exponent);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidParameter("regularization parameter must be positive");
}

// (A*A + alpha) v
void normal_apply(const LinearMap& a, double alpha, std::span<const double> v,
                  std::vector<double>& tmp, std::span<double> out) {
  a.apply(v, tmp);
  a.apply_adjoint(tmp, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += alpha * v[k];
}

}  // namespace

CgResult cg_normal_equations(const LinearMap& a, double alpha, std::span<const double> b,
                             std::span<double> x, const TikhonovConfig& config,
                             std::vector<double>* history) {
  check_alpha(alpha);
  if (!(config.tolerance > 0.0)) throw InvalidParameter("CG tolerance must be positive");
  const std::size_t n = a.domain().dim;
  const std::size_t m = a.codomain().dim;
  if (b.size() != m || x.size() != n) throw DimensionError("normal equations size mismatch");
  const std::size_t max_iter = config.max_iter ? config.max_iter : 20 * n + 1000;

  std::vector<double> rhs(n);
  a.apply_adjoint(b, rhs);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  CgResult result;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<double> tmp(m), r(n), p(n), q(n);
  auto true_residual = [&] {
    normal_apply(a, alpha, x, tmp, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
    return std::sqrt(dot(r, r));
  };

  // The recursive residual can drift below the true one; restart from the
  // current iterate until the recomputed residual meets the tolerance.
  double res = true_residual();
  for (int restart = 0; restart < 4; ++restart) {
    if (res <= config.tolerance * bnorm || result.iterations >= max_iter) break;
    std::copy(r.begin(), r.end(), p.begin());
    double rr = dot(r, r);
    while (result.iterations < max_iter && std::sqrt(rr) > config.tolerance * bnorm) {
      normal_apply(a, alpha, p, tmp, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;
      const double step = rr / pq;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += step * p[k];
        r[k] -= step * q[k];
      }
      const double rr_next = dot(r, r);
      ++result.iterations;
      if (history) history->push_back(std::sqrt(rr_next) / bnorm);
      const double beta = rr_next / rr;
      for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
      rr = rr_next;
    }
    res = true_residual();
  }
  result.relative_residual = res / bnorm;
  result.converged = result.relative_residual <= config.tolerance;
  return result;
}

SolveReport tikhonov_temporal(const DynamicForward& forward, const BochnerFunction& data,
                              std::span<const double> alphas, const TikhonovConfig& config,
                              const BochnerFunction* truth) {
  const auto start = Clock::now();
  if (forward.kind() != CompositionKind::pointwise)
    throw Unsupported("tracking needs a pointwise composition");
  const std::size_t n_t = forward.grid().size();
  if (alphas.size() != 1 && alphas.size() != n_t)
    throw DimensionError("expected one regularization parameter or one per node");
  for (double a : alphas) check_alpha(a);
  if (!data.grid().compatible(forward.grid()) || data.dim() != forward.output_space().dim)
    throw DimensionError("data does not match the forward operator");
  data.require_finite();

  const std::size_t nx = forward.input_space().dim;
  SolveReport report;
  std::vector<std::vector<double>> snapshots(n_t, std::vector<double>(nx, 0.0));
  double worst = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i < n_t; ++i) {
    const double alpha = alphas.size() == 1 ? alphas[0] : alphas[i];
    report.alphas.push_back(alpha);
    const FamilySlice slice(forward.family(), i);
    std::vector<double> history;
    const auto cg = cg_normal_equations(slice, alpha, data.at(i), snapshots[i], config, &history);
    for (double h : history)
      report.trace.push_back({report.trace.size(), i, h, alpha, std::nullopt});
    worst = std::max(worst, cg.relative_residual);
    converged = converged && cg.converged;
  }
  report.iterations = report.trace.size();
  report.normal_residual = worst;
  report.stop = converged ? StopReason::tolerance : StopReason::max_iter;

  const auto in = forward.input_space();
  BochnerFunction x = interpolate_tracked(snapshots, forward.grid(), {in.weight, 2.0});
  if (truth) {
    const double e = bochner_norm(x - *truth);
    const double t = bochner_norm(*truth);
    report.error = e;
    if (t > 0.0) report.relative_error = e / t;
  }
  report.reconstruction = std::move(x);
  report.seconds = seconds_since(start);
  return report;
}

SolveReport tikhonov_uniform(const DynamicForward& forward, const BochnerFunction& data,
                             double alpha, const TikhonovConfig& config, bool static_source,
                             const BochnerFunction* truth) {
  const auto start = Clock::now();
  check_alpha(alpha);
  if (!data.grid().compatible(forward.grid()) || data.dim() != forward.output_space().dim)
    throw DimensionError("data does not match the forward operator");
  data.require_finite();

  SolveReport report;
  report.alphas = {alpha};
  std::vector<double> history;
  const auto in = forward.input_space();
  if (static_source) {
    const StaticSourceMap map(forward);
    std::vector<double> x(in.dim, 0.0);
    const auto cg = cg_normal_equations(map, alpha, data.values(), x, config, &history);
    report.normal_residual = cg.relative_residual;
    report.stop = cg.converged ? StopReason::tolerance : StopReason::max_iter;
    if (truth) {
      const auto lifted = BochnerFunction::constant(forward.grid(), x, {in.weight, 2.0});
      const double e = bochner_norm(lifted - *truth);
      const double t = bochner_norm(*truth);
      report.error = e;
      if (t > 0.0) report.relative_error = e / t;
    }
    report.reconstruction = std::move(x);
  } else {
    const SpaceTimeMap map(forward);
    BochnerFunction theta(forward.grid(), in.dim, {in.weight, 2.0});
    const auto cg = cg_normal_equations(map, alpha, data.values(), theta.values(), config, &history);
    report.normal_residual = cg.relative_residual;
    report.stop = cg.converged ? StopReason::tolerance : StopReason::max_iter;
    if (truth) {
      const double e = bochner_norm(theta - *truth);
      const double t = bochner_norm(*truth);
      report.error = e;
      if (t > 0.0) report.relative_error = e / t;
    }
    report.reconstruction = std::move(theta);
  }
  for (double h : history)
    report.trace.push_back({report.trace.size(), std::nullopt, h, alpha, std::nullopt});
  report.iterations = report.trace.size();
  report.seconds = seconds_since(start);
  return report;
}

double estimate_norm(const LinearMap& map, std::size_t iterations, std::uint64_t seed) {
  const std::size_t n = map.domain().dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n), w(map.codomain().dim), u(n);
  for (double& c : v) c = normal(rng);
  double nv = std::sqrt(dot(v, v));
  if (nv == 0.0) return 0.0;
  for (double& c : v) c /= nv;
  double estimate = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iterations, 1); ++it) {
    map.apply(v, w);
    map.apply_adjoint(w, u);
    const double nu = std::sqrt(dot(u, u));
    estimate = std::sqrt(map.codomain().inner(w, w) / map.domain().inner(v, v));
    if (nu == 0.0) break;
    for (std::size_t k = 0; k < n; ++k) v[k] = u[k] / nu;
  }
  return estimate;
}

namespace {

double residual(const Subproblem& sub, std::span<const double> x, std::vector<double>& r) {
  sub.map->apply(x, r);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= sub.data[k];
  return sub.map->codomain().norm(r);
}

void validate(const std::vector<Subproblem>& subs, std::span<const double> start) {
  if (subs.empty()) throw InvalidInput("no sub-problems");
  for (const auto& s : subs) {
    if (!s.map) throw InvalidInput("null sub-problem operator");
    if (s.map->domain().dim != start.size())
      throw DimensionError("sub-problem unknowns do not match the start vector");
    if (s.data.size() != s.map->codomain().dim)
      throw DimensionError("sub-problem data has the wrong size");
    if (!(s.tau >= 1.0)) throw InvalidParameter("tau must be at least 1");
    if (!(s.noise_level >= 0.0) || !std::isfinite(s.noise_level))
      throw InvalidParameter("noise levels must be non-negative");
    for (double v : s.data)
      if (!std::isfinite(v)) throw InvalidInput("sub-problem data is not finite");
  }
  for (double v : start)
    if (!std::isfinite(v)) throw InvalidInput("start vector is not finite");
}

// Cholesky solve of a small SPD system; returns false on breakdown.
bool solve_spd(std::vector<double> g, std::vector<double>& b, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = g[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= g[j * m + k] * g[j * m + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    g[j * m + j] = d;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = g[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= g[i * m + k] * g[j * m + k];
      g[i * m + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= g[i * m + k] * b[k];
    b[i] = s / g[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= g[k * m + i] * b[k];
    b[i] = s / g[i * m + i];
  }
  return true;
}

class MultiDirectionStep {
 public:
  explicit MultiDirectionStep(std::size_t memory) : memory_(memory) {}

  double operator()(const Subproblem& sub, std::span<double> x) {
    history_.emplace_back(x.begin(), x.end());
    if (history_.size() > memory_) history_.erase(history_.begin());
    return subspace_step(sub, history_, x);
  }

 private:
  std::size_t memory_;
  std::vector<std::vector<double>> history_;
};

template <class Step>
SolveReport cyclic(const std::vector<Subproblem>& subs, const KaczmarzConfig& config,
                   std::span<const double> start, const ErrorProbe* probe, Step&& step) {
  const auto clock = Clock::now();
  const std::size_t n = subs.size();
  std::vector<double> x(start.begin(), start.end());

  std::vector<double> cycle(n);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    scratch.resize(subs[i].map->codomain().dim);
    cycle[i] = residual(subs[i], x, scratch);
  }
  const double initial_max = *std::max_element(cycle.begin(), cycle.end());

  auto discrepancy = [&] {
    for (std::size_t i = 0; i < n; ++i)
      if (!(cycle[i] <= subs[i].tau * subs[i].noise_level)) return false;
    return true;
  };
  auto within_tolerance = [&] {
    return config.residual_tolerance &&
           *std::max_element(cycle.begin(), cycle.end()) <= *config.residual_tolerance;
  };

  SolveReport report;
  std::optional<StopReason> stop;
  for (std::size_t sweep = 0; sweep < config.max_sweeps && !stop; ++sweep) {
    if (discrepancy()) {
      stop = StopReason::discrepancy;
      break;
    }
    if (within_tolerance()) {
      stop = StopReason::tolerance;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<double> err;
      if (probe) err = probe->error(x);
      if (config.skip_satisfied) {
        scratch.resize(subs[i].map->codomain().dim);
        const double r = residual(subs[i], x, scratch);
        cycle[i] = r <= subs[i].tau * subs[i].noise_level ? r : step(i, x);
      } else {
        cycle[i] = step(i, x);
      }
      report.trace.push_back({report.trace.size(), i, cycle[i], std::nullopt, err});
    }
    const double worst = *std::max_element(cycle.begin(), cycle.end());
    if (!std::isfinite(worst) || (initial_max > 0.0 && worst > 1e6 * initial_max))
      throw DivergenceError("Kaczmarz residual exceeded 1e6 times its initial value");
  }
  if (!stop) {
    if (report.trace.size() >= n && discrepancy())
      stop = StopReason::discrepancy;
    else if (report.trace.size() >= n && within_tolerance())
      stop = StopReason::tolerance;
    else
      stop = StopReason::max_iter;
  }

  report.stop = *stop;
  report.iterations = report.trace.size();
  report.cycle_residuals = cycle;
  for (std::size_t i = 0; i < n; ++i) {
    scratch.resize(subs[i].map->codomain().dim);
    report.final_residuals.push_back(residual(subs[i], x, scratch));
  }
  if (probe) {
    report.error = probe->error(x);
    if (probe->truth_norm > 0.0) report.relative_error = *report.error / probe->truth_norm;
  }
  report.reconstruction = std::move(x);
  report.seconds = seconds_since(clock);
  return report;
}

}  // namespace

double landweber_step(const Subproblem& sub, double omega, std::span<double> x) {
  std::vector<double> r(sub.map->codomain().dim);
  const double res = residual(sub, x, r);
  std::vector<double> g(x.size());
  sub.map->apply_adjoint(r, g);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] -= omega * g[k];
  return res;
}

double subspace_step(const Subproblem& sub, std::span<const std::vector<double>> iterates,
                     std::span<double> x) {
  const std::size_t ny = sub.map->codomain().dim;
  const std::size_t nx = x.size();
  std::vector<double> r(ny);
  const double res = residual(sub, x, r);

  const std::size_t m = iterates.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(nx));
  std::vector<std::vector<double>> u(m, std::vector<double>(ny));
  std::vector<double> rk(ny);
  for (std::size_t k = 0; k < m; ++k) {
    if (iterates[k].size() != nx) throw DimensionError("iterate has the wrong length");
    residual(sub, iterates[k], rk);
    sub.map->apply_adjoint(rk, d[k]);
    sub.map->apply(d[k], u[k]);
  }
  const auto& space = sub.map->codomain();
  std::vector<double> g(m * m), b(m);
  double trace = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l <= k; ++l) g[k * m + l] = g[l * m + k] = space.inner(u[k], u[l]);
    b[k] = space.inner(u[k], r);
    trace += g[k * m + k];
  }
  if (!(trace > 0.0)) return res;
  for (std::size_t k = 0; k < m; ++k) g[k * m + k] += 1e-12 * trace;
  if (!solve_spd(std::move(g), b, m)) return res;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t c = 0; c < nx; ++c) x[c] -= b[k] * d[k][c];
  return res;
}

SolveReport landweber_kaczmarz(const std::vector<Subproblem>& subproblems,
                               const KaczmarzConfig& config, std::span<const double> start,
                               const ErrorProbe* probe) {
  validate(subproblems, start);
  std::vector<double> omega(subproblems.size());
  if (config.step) {
    if (!(*config.step > 0.0) || !std::isfinite(*config.step))
      throw InvalidParameter("step size must be positive");
    std::fill(omega.begin(), omega.end(), *config.step);
  } else {
    for (std::size_t i = 0; i < subproblems.size(); ++i) {
      const double norm =
          estimate_norm(*subproblems[i].map, config.power_iterations, config.power_seed + i);
      omega[i] = norm > 0.0 ? 0.9 / (norm * norm) : 0.0;
    }
  }
  return cyclic(subproblems, config, start, probe, [&](std::size_t i, std::vector<double>& x) {
    return landweber_step(subproblems[i], omega[i], x);
  });
}

SolveReport kaczmarz_multi_direction(const std::vector<Subproblem>& subproblems,
                                     const KaczmarzConfig& config, std::span<const double> start,
                                     const ErrorProbe* probe) {
  validate(subproblems, start);
  if (config.memory < 1) throw InvalidParameter("search-direction memory must be at least 1");
  MultiDirectionStep step(config.memory);
  return cyclic(subproblems, config, start, probe, [&](std::size_t i, std::vector<double>& x) {
    return step(subproblems[i], x);
  });
}

std::vector<double> split_noise_level(double delta, std::size_t count, NoiseSplit split) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw InvalidParameter("noise level must be non-negative");
  if (count == 0) throw InvalidParameter("no sections to split the noise level over");
  const double each =
      split == NoiseSplit::share ? delta / std::sqrt(static_cast<double>(count)) : delta;
  return std::vector<double>(count, each);
}

std::vector<Subproblem> time_subproblems(std::shared_ptr<const DynamicForward> forward,
                                         const BochnerFunction& data,
                                         std::span<const double> noise_levels, double tau,
                                         bool static_source) {
  if (!forward) throw InvalidInput("null forward operator");
  const std::size_t n = forward->grid().size();
  if (!data.grid().compatible(forward->grid()) || data.dim() != forward->output_space().dim)
    throw DimensionError("data does not match the forward operator");
  if (noise_levels.size() != n) throw DimensionError("expected one noise level per time node");
  std::vector<Subproblem> subs;
  subs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto y = data.at(i);
    subs.push_back({std::make_shared<SectionMap>(forward, i, static_source),
                    std::vector<double>(y.begin(), y.end()), noise_levels[i], tau});
  }
  return subs;
}

SolveReport kaczmarz_time(std::shared_ptr<const DynamicForward> forward,
                          const BochnerFunction& data, std::span<const double> noise_levels,
                          double tau, bool static_source, const KaczmarzConfig& config,
                          bool multi_direction, const BochnerFunction* truth) {
  const auto subs = time_subproblems(forward, data, noise_levels, tau, static_source);
  const auto in = forward->input_space();
  const TimeGrid grid = forward->grid();
  const SpaceMetric metric{in.weight, 2.0};
  auto lift = [&](std::span<const double> x) {
    if (static_source) return BochnerFunction::constant(grid, x, metric);
    return BochnerFunction(grid, in.dim, metric, 2.0, std::vector<double>(x.begin(), x.end()));
  };

  std::optional<ErrorProbe> probe;
  if (truth) {
    if (!truth->grid().compatible(grid) || truth->dim() != in.dim)
      throw DimensionError("truth does not match the forward operator");
    probe = ErrorProbe{[&](std::span<const double> x) { return bochner_norm(lift(x) - *truth); },
                       bochner_norm(*truth)};
  }
  const std::vector<double> start(static_source ? in.dim : grid.size() * in.dim, 0.0);
  const ErrorProbe* p = probe ? &*probe : nullptr;
  SolveReport report = multi_direction ? kaczmarz_multi_direction(subs, config, start, p)
                                       : landweber_kaczmarz(subs, config, start, p);
  if (!static_source) report.reconstruction = lift(coordinates(report));
  return report;
}

}  // namespace dynip
