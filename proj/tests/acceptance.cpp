// Acceptance checks, one PASS/FAIL line each.
// Usage: acceptance <path to dynip executable> <source dir>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dynip/diagnostics.hpp"
#include "dynip/io.hpp"
#include "dynip/problems.hpp"
#include "dynip/solvers.hpp"
#include "oracles.hpp"

using namespace dynip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

BochnerFunction field(const ProblemInstance& inst, const SolveReport& r) {
  if (const auto* u = std::get_if<BochnerFunction>(&r.reconstruction)) return *u;
  return BochnerFunction::constant(inst.forward->grid(), std::get<std::vector<double>>(r.reconstruction),
                                   inst.space.metric());
}

double relative_gap(const LinearMap& map, std::mt19937_64& rng) {
  const auto x = oracle::normal_vector(rng, map.domain().dim);
  const auto y = oracle::normal_vector(rng, map.codomain().dim);
  const double lhs = map.codomain().inner(map(x), y);
  const double rhs = map.domain().inner(x, map.adjoint(y));
  return std::abs(lhs - rhs) / (map.domain().norm(x) * map.codomain().norm(y));
}

Outcome adjoints() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (const auto& inst : {make_dct_analogue(32, 64, 0.05, 16), make_mpi_analogue(32, 64, 3.0),
                           make_nonuniform_example(32, 64)}) {
    const auto& f = *inst.forward;
    for (int k = 0; k < 100; ++k) {
      worst = std::max(worst, relative_gap(SpaceTimeMap(f), rng));
      worst = std::max(worst, relative_gap(FamilySlice(f.family(), k % f.grid().size()), rng));
    }
  }
  return {worst <= 1e-10, "max relative gap " + sci(worst)};
}

Outcome causality() {
  std::mt19937_64 rng(77);
  const TimeGrid time(1.0, 16);
  const SpatialGrid grid(0.0, 1.0, 8);
  const VectorSpace x{8, grid.step()};
  const std::vector<std::shared_ptr<const DynamicForward>> forwards{
      make_mpi_analogue(16, 8, 3.0).forward,
      std::make_shared<const DynamicForward>(
          time, compose(make_subsample_observer(rotating_window(16, 8, 3), x), make_gaussian_smoothing(grid, 0.1)),
          CompositionKind::observe_then_accumulate, make_causal_kernel(time, oracle::normal_vector(rng, 16)))};
  std::size_t changed = 0;
  for (const auto& f : forwards) {
    const BochnerFunction theta(time, 8, grid.metric(), 2.0, oracle::normal_vector(rng, 128));
    const auto y = f->apply(theta);
    for (std::size_t i = 0; i < 16; ++i) {
      auto u = theta;
      for (std::size_t j = i + 1; j < 16; ++j)
        for (double& v : u.at(j)) v = 3.0 - 7.0 * v;
      const auto yu = f->apply(u);
      for (std::size_t r = 0; r <= i; ++r)
        for (std::size_t k = 0; k < y.dim(); ++k) changed += yu.at(r)[k] != y.at(r)[k];
    }
  }
  return {changed == 0, std::to_string(changed) + " differing entries"};
}

Outcome normal_residuals() {
  double worst = 0.0;
  for (const auto& inst : {make_dct_analogue(16, 16, 0.05, 8), make_mpi_analogue(16, 8, 3.0),
                           make_nonuniform_example(16, 16), make_identity_problem(8, 4)}) {
    const auto y = add_noise(inst.data, {1e-2, 11});
    for (double alpha : {1e-1, 1e-3}) {
      worst = std::max(worst, *tikhonov_uniform(*inst.forward, y, alpha).normal_residual);
      worst = std::max(worst, *tikhonov_uniform(*inst.forward, y, alpha, {}, true).normal_residual);
      if (inst.forward->kind() == CompositionKind::pointwise) {
        const std::vector<double> a{alpha};
        worst = std::max(worst, *tikhonov_temporal(*inst.forward, y, a).normal_residual);
      }
    }
  }
  return {worst <= 1e-8, "max relative normal residual " + sci(worst)};
}

double max_relative(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num = std::max(num, std::abs(a[k] - b[k]));
    den = std::max(den, std::abs(b[k]));
  }
  return num / den;
}

Outcome decoupling() {
  const auto inst = make_dct_analogue(16, 16, 0.05, 8);
  const auto y = add_noise(inst.data, {1e-2, 5});
  const double alpha = 1e-3;
  const std::vector<double> a{alpha};
  const auto t = std::get<BochnerFunction>(tikhonov_temporal(*inst.forward, y, a).reconstruction);
  const auto u = std::get<BochnerFunction>(tikhonov_uniform(*inst.forward, y, alpha).reconstruction);

  const auto dense = assemble_dense(*inst.forward);
  const SpaceTimeMap map(*inst.forward);
  const double wx = map.domain().weight, wy = map.codomain().weight;
  oracle::Matrix m(dense.rows, dense.cols);
  for (std::size_t r = 0; r < dense.rows; ++r)
    for (std::size_t c = 0; c < dense.cols; ++c) m(r, c) = dense(r, c) * std::sqrt(wx / wy);
  const oracle::Vector ref = oracle::tikhonov(m, oracle::to_eigen(y.values()), alpha, wx, wy);
  const std::vector<double> r(ref.data(), ref.data() + ref.size());

  const double tu = max_relative(u.values(), t.values());
  const double dense_gap = std::max(max_relative(t.values(), r), max_relative(u.values(), r));
  return {tu <= 1e-8 && dense_gap <= 1e-7, "solvers " + sci(tu) + ", vs dense " + sci(dense_gap)};
}

Outcome convergence() {
  const auto inst = make_dct_analogue(32, 32, 0.05, 32);
  const std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> errors;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const auto y = add_noise(inst.data, {deltas[k], 1 + k});
    errors.push_back(*tikhonov_uniform(*inst.forward, y, deltas[k], {}, false, &inst.truth).error);
  }
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) decreasing = decreasing && errors[k + 1] < errors[k];
  std::string d = "errors";
  for (double e : errors) d += " " + sci(e);
  return {decreasing && errors.back() <= 0.5 * errors.front(), d};
}

Outcome kaczmarz_discrepancy() {
  const auto inst = make_mpi_analogue(32, 16, 3.0);
  const double delta = 1e-2, tau = 2.0;
  NoiseSpec noise{delta, 1};
  noise.per_section = true;
  const auto y = add_noise(inst.data, noise);
  const std::size_t n = inst.forward->grid().size();
  const auto levels = split_noise_level(delta, n, NoiseSplit::share);
  KaczmarzConfig cfg;
  cfg.max_sweeps = 500;
  cfg.skip_satisfied = true;
  const auto r = kaczmarz_time(inst.forward, y, levels, tau, true, cfg, false, &inst.truth);
  const std::size_t sweeps = (r.iterations + n - 1) / n;
  bool within = r.cycle_residuals.size() == n;
  double ratio = 0.0;
  for (std::size_t i = 0; i < r.cycle_residuals.size(); ++i) {
    within = within && r.cycle_residuals[i] <= tau * levels[i];
    ratio = std::max(ratio, r.cycle_residuals[i] / (tau * levels[i]));
  }
  const double initial = bochner_norm(inst.truth);
  const bool pass = r.stop == StopReason::discrepancy && sweeps < 500 && within && *r.error <= initial;
  return {pass, "stop " + std::string(to_string(r.stop)) + " after " + std::to_string(sweeps) +
                    " sweeps, max residual/(tau delta_i) " + sci(ratio) + ", error " + sci(*r.error) +
                    " vs initial " + sci(initial)};
}

Outcome kaczmarz_pseudoinverse() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const auto truth = oracle::normal_vector(rng, 6);
    std::vector<Subproblem> subs;
    oracle::Matrix stacked(32, 6);
    oracle::Vector rhs(32);
    for (std::size_t k = 0; k < 4; ++k) {
      auto a = std::make_shared<DenseMap>(8, 6, oracle::normal_vector(rng, 48));
      const auto y = (*a)(truth);
      for (std::size_t r = 0; r < 8; ++r) {
        rhs(8 * k + r) = y[r];
        for (std::size_t c = 0; c < 6; ++c) stacked(8 * k + r, c) = a->entry(r, c);
      }
      subs.push_back({std::move(a), y, 0.0, 2.0});
    }
    KaczmarzConfig cfg;
    cfg.residual_tolerance = 1e-9;
    cfg.max_sweeps = 100000;
    const std::vector<double> start(6, 0.0);
    const auto r = landweber_kaczmarz(subs, cfg, start);
    const auto& x = std::get<std::vector<double>>(r.reconstruction);
    worst = std::max(worst, oracle::max_abs_diff(oracle::to_eigen(x), oracle::pseudoinverse_solve(stacked, rhs)));
  }
  return {worst <= 1e-6, "max deviation from the pseudoinverse solution " + sci(worst)};
}

DynamicForward gaussian_forward(std::size_t n_x) {
  return DynamicForward(TimeGrid(1.0, 1), make_gaussian_smoothing(SpatialGrid(0.0, 1.0, n_x), 0.05));
}

Outcome compactness() {
  const auto g64 = temporal_spectrum(gaussian_forward(64), 0);
  const auto g32 = temporal_spectrum(gaussian_forward(32), 0);
  const double decay = g64.singular_values[19] / g64.singular_values[0];
  auto ref = oracle::symmetric_eigenvalues(oracle::gaussian(64, 0.05));
  for (double& v : ref) v = std::abs(v);
  std::sort(ref.rbegin(), ref.rend());
  double gap = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) gap = std::max(gap, std::abs(g64.singular_values[k] - ref[k]));
  const bool pass = decay <= 1e-6 && gap <= 1e-8 && g64.condition > g32.condition;
  return {pass, "sigma_20/sigma_1 " + sci(decay) + " (threshold 1e-6), oracle gap " + sci(gap) +
                    ", cond32 " + sci(g32.condition) + " cond64 " + sci(g64.condition)};
}

Outcome integrability() {
  std::vector<double> tails;
  double gap = 0.0;
  for (std::size_t n_t : {32, 64}) {
    const TimeGrid time(1.0, n_t);
    const VectorSpace x{4, 0.25};
    const DynamicForward f(time, compose(make_scaling_family(time, x), make_identity_family(x)));
    const std::vector<double> one(4, 1.0);
    const std::vector<BochnerFunction> unit{BochnerFunction::constant(time, one, {0.25, 2.0})};
    const double r = 4.0 / time.horizon();
    const std::vector<double> radii{r};
    const double tail = integrability_tail(f, unit, radii, 1.0).front().tail;
    double ref = 0.0;
    for (std::size_t i = 0; i < n_t; ++i) {
      const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n_t);
      if (t < 1.0 / r) ref += 1.0 / static_cast<double>(n_t) / t;
    }
    gap = std::max(gap, std::abs(tail - ref));
    tails.push_back(tail);
  }
  return {gap <= 1e-12 && tails[1] > tails[0],
          "oracle gap " + sci(gap) + ", tail " + sci(tails[0]) + " -> " + sci(tails[1])};
}

BochnerFunction random_function(std::mt19937_64& rng, double p, double s) {
  const TimeGrid g(1.0, 9);
  return BochnerFunction(g, 5, {0.2, s}, p, oracle::normal_vector(rng, 45));
}

Outcome bochner_exactness() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (double p : {1.0, 2.0, 3.0})
    for (double horizon : {0.5, 1.0, 2.0}) {
      const auto x = oracle::normal_vector(rng, 7);
      const SpaceMetric m{1.0 / 7.0, 2.0};
      const auto u = BochnerFunction::constant(TimeGrid(horizon, 17), x, m, p);
      const double expected = std::pow(horizon, 1.0 / p) * m.norm(x);
      worst = std::max(worst, std::abs(bochner_norm(u) - expected) / expected);
    }
  std::size_t violations = 0;
  const std::vector<std::pair<double, double>> exps{{2.0, 2.0}, {3.0, 1.5}, {1.5, 4.0}, {4.0, 3.0}};
  for (int k = 0; k < 100; ++k) {
    const auto [p, s] = exps[k % exps.size()];
    const auto a = random_function(rng, p, s);
    const auto b = random_function(rng, p / (p - 1.0), s / (s - 1.0));
    const auto h = holder_pairing(a, b);
    violations += std::abs(h.pairing) > h.bound * (1.0 + 1e-12);
  }
  return {worst <= 1e-14 && violations == 0,
          "constant-norm relative error " + sci(worst) + ", " + std::to_string(violations) + " Hoelder violations"};
}

Outcome static_benefit() {
  const auto inst = make_nonuniform_example(32, 32);
  const double delta = 1e-2;
  std::size_t wins = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto y = add_noise(inst.data, {delta, seed});
    const double uniform = *tikhonov_uniform(*inst.forward, y, delta, {}, true, &inst.truth).error;
    const std::vector<double> a{delta};
    const auto track = std::get<BochnerFunction>(tikhonov_temporal(*inst.forward, y, a).reconstruction);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inst.forward->grid().size(); ++i) {
      const auto lifted = BochnerFunction::constant(inst.forward->grid(), track.at(i), inst.space.metric());
      best = std::min(best, bochner_norm(lifted - inst.truth));
    }
    wins += uniform <= best;
    worst_ratio = std::max(worst_ratio, uniform / best);
  }
  return {wins == 10, std::to_string(wins) + "/10 seeds, worst static/best-snapshot ratio " + sci(worst_ratio)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path());
  return files;
}

Outcome reproducibility(const std::string& exe, const fs::path& source) {
  const fs::path root = fs::temp_directory_path() / "dynip_acceptance_sweep";
  fs::remove_all(root);
  const fs::path config = source / "configs" / "dct_sweep.ini";
  for (const char* name : {"a", "b"}) {
    const std::string cmd = "\"" + exe + "\" sweep --config \"" + config.string() + "\" --out \"" +
                            (root / name).string() + "\" --quiet";
    if (std::system(cmd.c_str()) != 0) return {false, "sweep exited with an error"};
  }
  const auto a = snapshot(root / "a"), b = snapshot(root / "b");
  fs::remove_all(root);
  return {!a.empty() && a == b, std::to_string(a.size()) + " files, " + (a == b ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <dynip executable> <source dir>\n");
    return 2;
  }
  const std::string exe = argv[1];
  const fs::path source = argv[2];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"adjoint correctness", adjoints},
      {"causality", causality},
      {"tikhonov optimality", normal_residuals},
      {"decoupling oracle", decoupling},
      {"convergence sweep", convergence},
      {"kaczmarz discrepancy termination", kaczmarz_discrepancy},
      {"kaczmarz least-squares oracle", kaczmarz_pseudoinverse},
      {"compactness witness", compactness},
      {"non-uniform integrability witness", integrability},
      {"bochner norm exactness", bochner_exactness},
      {"static-source benefit", static_benefit},
      {"end-to-end reproducibility", [&] { return reproducibility(exe, source); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
