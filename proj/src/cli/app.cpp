#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dynip/cli.hpp"
#include "dynip/diagnostics.hpp"
#include "dynip/errors.hpp"
#include "dynip/io.hpp"
#include "svg.hpp"

namespace dynip::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_shortest(v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
}

// Plots never decide the outcome of a command.
void write_svg(const fs::path& path, const PlotSpec& spec,
               const std::vector<std::pair<double, double>>& points) {
  try {
    write_text_atomic(path, line_plot(spec, points));
  } catch (const std::exception& e) {
    std::cerr << "warning: plot " << path.string() << " skipped: " << e.what() << "\n";
  }
}

NoiseSpec noise_spec(const NoiseConfig& n, double delta, std::uint64_t seed) {
  NoiseSpec spec{delta, seed, n.fraction};
  spec.per_section = n.per_section;
  return spec;
}

BochnerFunction noisy_data(const ExperimentConfig& c, const ProblemInstance& inst) {
  if (!c.problem.data_csv) return add_noise(inst.data, noise_spec(c.noise, c.noise.delta, c.noise.seed));
  auto y = read_csv(*c.problem.data_csv, inst.data.metric());
  if (!y.grid().compatible(inst.data.grid()) || y.dim() != inst.data.dim())
    throw ConfigError("problem.data_csv: " + c.problem.data_csv->string() +
                      " does not match the problem grid");
  return y;
}

bool is_tikhonov(const SolverConfig& s) {
  return s.method == "tikhonov_temporal" || s.method == "tikhonov_uniform";
}

struct Outcome {
  SolveReport report;
  std::optional<double> alpha;
  BochnerFunction estimate;  ///< reconstruction as a space-time function
  double data_residual = 0.0;
  std::vector<double> levels;
};

Outcome solve(const ExperimentConfig& c, const ProblemInstance& inst, const BochnerFunction& y,
              double delta) {
  const auto& s = c.solver;
  const auto& f = *inst.forward;
  Outcome out{SolveReport{}, std::nullopt, inst.truth, 0.0, {}};
  if (is_tikhonov(s)) {
    out.alpha = s.alpha ? *s.alpha : choose_alpha(s.rule, delta);
    const TikhonovConfig cfg{s.tolerance, s.cg_max_iter};
    if (s.method == "tikhonov_temporal") {
      const std::vector<double> a{*out.alpha};
      out.report = tikhonov_temporal(f, y, a, cfg, &inst.truth);
    } else {
      out.report = tikhonov_uniform(f, y, *out.alpha, cfg, s.static_source, &inst.truth);
    }
  } else {
    KaczmarzConfig cfg;
    cfg.step = s.step;
    cfg.max_sweeps = s.max_iter;
    cfg.memory = s.method == "kaczmarz_multi" ? s.memory : 1;
    cfg.residual_tolerance = s.residual_tolerance;
    cfg.skip_satisfied = s.skip_satisfied;
    cfg.power_iterations = s.power_iterations;
    cfg.power_seed = s.power_seed;
    out.levels = split_noise_level(delta, f.grid().size(), s.noise_split);
    out.report = kaczmarz_time(inst.forward, y, out.levels, s.tau, s.static_source, cfg,
                               s.method == "kaczmarz_multi", &inst.truth);
  }
  if (const auto* x = std::get_if<std::vector<double>>(&out.report.reconstruction))
    out.estimate = BochnerFunction::constant(f.grid(), *x, inst.space.metric());
  else
    out.estimate = std::get<BochnerFunction>(out.report.reconstruction);
  out.data_residual = bochner_norm(f.apply(out.estimate) - y);
  return out;
}

std::string trace_csv(const SolveReport& r) {
  std::string s = "iter,subproblem,residual,alpha,error\n";
  for (const auto& row : r.trace) {
    s += std::to_string(row.iter) + ",";
    if (row.subproblem) s += std::to_string(*row.subproblem);
    s += "," + num(row.residual) + "," + opt(row.alpha) + "," + opt(row.error) + "\n";
  }
  return s;
}

std::string report_txt(const ExperimentConfig& c, const Outcome& o, double delta) {
  const auto& r = o.report;
  std::ostringstream s;
  s << "kind=" << c.problem.kind << "\n"
    << "method=" << c.solver.method << "\n"
    << "n_t=" << c.problem.n_t << "\n"
    << "n_x=" << c.problem.n_x << "\n"
    << "T=" << num(c.problem.horizon) << "\n"
    << "delta=" << num(delta) << "\n"
    << "seed=" << c.noise.seed << "\n"
    << "static_source=" << (c.solver.static_source ? "true" : "false") << "\n";
  if (o.alpha) s << "alpha=" << num(*o.alpha) << "\n";
  if (!is_tikhonov(c.solver)) {
    s << "tau=" << num(c.solver.tau) << "\n"
      << "noise_level_per_section=" << num(o.levels.front()) << "\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < r.cycle_residuals.size(); ++i)
      worst = std::max(worst, r.cycle_residuals[i] / (c.solver.tau * o.levels[i]));
    s << "max_cycle_ratio=" << num(worst) << "\n";
  }
  s << "stop=" << to_string(r.stop) << "\n"
    << "iterations=" << r.iterations << "\n"
    << "data_residual=" << num(o.data_residual) << "\n";
  if (r.normal_residual) s << "normal_residual=" << num(*r.normal_residual) << "\n";
  if (r.error) s << "error=" << num(*r.error) << "\n";
  if (r.relative_error) s << "relative_error=" << num(*r.relative_error) << "\n";
  return s.str();
}

std::string spectrum_csv(const std::vector<double>& sigma) {
  std::string s = "k,sigma\n";
  for (std::size_t k = 0; k < sigma.size(); ++k) s += std::to_string(k + 1) + "," + num(sigma[k]) + "\n";
  return s;
}

std::string vectors_csv(const DenseMatrix& v) {
  std::string s = "k";
  for (std::size_t r = 0; r < v.rows; ++r) s += ",v_" + std::to_string(r);
  s += "\n";
  for (std::size_t k = 0; k < v.cols; ++k) {
    s += std::to_string(k + 1);
    for (std::size_t r = 0; r < v.rows; ++r) s += "," + num(v(r, k));
    s += "\n";
  }
  return s;
}

void write_spectrum(const fs::path& dir, const std::string& name, const SpectrumReport& rep,
                    bool svg) {
  write_text_atomic(dir / (name + ".csv"), spectrum_csv(rep.singular_values));
  if (rep.right_vectors) write_text_atomic(dir / (name + "_vectors.csv"), vectors_csv(*rep.right_vectors));
  if (svg) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < rep.singular_values.size(); ++k)
      pts.emplace_back(static_cast<double>(k + 1), rep.singular_values[k]);
    write_svg(dir / (name + ".svg"), {name, "k", "sigma_k", false, true}, pts);
  }
}

std::string condition(const SpectrumReport& rep) {
  return rep.rank_deficient ? std::string("inf") : num(rep.condition);
}

}  // namespace

ProblemInstance build_problem(const ProblemConfig& p) {
  if (p.kind == "dct") {
    if (p.mask_csv) return make_dct_analogue(p.n_t, p.n_x, p.width, read_mask_csv(*p.mask_csv), p.horizon);
    return make_dct_analogue(p.n_t, p.n_x, p.width, p.window.value_or(p.n_x), p.horizon);
  }
  if (p.kind == "mpi") {
    if (p.kernel_csv) return make_mpi_analogue(p.n_t, p.n_x, read_kernel_csv(*p.kernel_csv), p.horizon);
    return make_mpi_analogue(p.n_t, p.n_x, p.decay, p.horizon);
  }
  if (p.kind == "nonuniform") return make_nonuniform_example(p.n_t, p.n_x, p.width, p.horizon);
  if (p.kind == "identity") return make_identity_problem(p.n_t, p.n_x, p.horizon);
  throw ConfigError("problem.kind: unknown kind '" + p.kind + "'");
}

void cmd_forward(const ExperimentConfig& c) {
  const auto inst = build_problem(c.problem);
  const auto spec = noise_spec(c.noise, c.noise.delta, c.noise.seed);
  ensure_dir(c.output);
  export_instance(c.output, inst, add_noise(inst.data, spec), spec);
}

void cmd_solve(const ExperimentConfig& c) {
  const auto inst = build_problem(c.problem);
  const auto y = noisy_data(c, inst);
  const auto o = solve(c, inst, y, c.noise.delta);
  ensure_dir(c.output);
  write_csv(c.output / "reconstruction.csv", o.estimate);
  write_text_atomic(c.output / "trace.csv", trace_csv(o.report));
  write_text_atomic(c.output / "report.txt", report_txt(c, o, c.noise.delta));
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "delta,alpha,error,residual\n";
  for (const auto& r : rows)
    s += num(r.delta) + "," + opt(r.alpha) + "," + num(r.error) + "," + num(r.residual) + "\n";
  return s;
}

std::vector<SweepRow> read_sweep_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "delta,alpha,error,residual")
    throw InvalidInput("sweep table: unexpected header");
  auto parse = [](const std::string& f) {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
      throw InvalidInput("sweep table: bad number '" + f + "'");
    return v;
  };
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 4) throw InvalidInput("sweep table: expected four columns");
    rows.push_back({parse(f[0]), f[1].empty() ? std::nullopt : std::optional<double>(parse(f[1])),
                    parse(f[2]), parse(f[3])});
  }
  return rows;
}

std::string sweep_svg(const std::vector<SweepRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.delta, r.error);
  return line_plot({"reconstruction error", "delta", "error", true, true}, pts);
}

void cmd_sweep(const ExperimentConfig& c) {
  if (c.solver.alpha)
    throw ConfigError("solver.alpha: the sweep picks alpha from the rule; remove the fixed value");
  if (c.problem.data_csv)
    throw ConfigError("problem.data_csv: the sweep generates its own data");
  const auto inst = build_problem(c.problem);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    const double delta = c.deltas[k];
    const auto y = add_noise(inst.data, noise_spec(c.noise, delta, c.noise.seed + k));
    const auto o = solve(c, inst, y, delta);
    rows.push_back({delta, o.alpha, *o.report.error, o.data_residual});
  }
  ensure_dir(c.output);
  write_text_atomic(c.output / "sweep.csv", sweep_csv(rows));
  try {
    write_text_atomic(c.output / "sweep.svg", sweep_svg(rows));
  } catch (const std::exception& e) {
    std::cerr << "warning: plot skipped: " << e.what() << "\n";
  }
}

void cmd_probe(const ExperimentConfig& c) {
  const auto& q = c.probe;
  if (q.probes.empty()) throw ConfigError("probe.probes: no probes requested");
  const auto inst = build_problem(c.problem);
  const auto& f = *inst.forward;
  ensure_dir(c.output);
  std::string summary;

  auto ensemble = [&] {
    return unit_ensemble(f.grid(), f.input_space().dim, inst.space.metric(), q.ensemble_size,
                         c.noise.seed, q.constant_ensemble);
  };

  for (const auto& name : q.probes) {
    if (name == "temporal_spectrum") {
      std::vector<std::size_t> indices;
      if (q.time_index) indices.push_back(*q.time_index);
      else for (std::size_t i = 0; i < f.grid().size(); ++i) indices.push_back(i);
      std::string table = "i,condition\n";
      for (std::size_t i : indices) {
        const auto rep = temporal_spectrum(f, i, q.vectors);
        write_spectrum(c.output, q.time_index ? "temporal_spectrum" : "temporal_spectrum_" + std::to_string(i),
                       rep, q.svg);
        table += std::to_string(i) + "," + condition(rep) + "\n";
      }
      write_text_atomic(c.output / "temporal_condition.csv", table);
    } else if (name == "stacked_spectrum") {
      const auto rep = stacked_spectrum(f, q.vectors);
      write_spectrum(c.output, "stacked_spectrum", rep, q.svg);
      summary += "stacked_condition=" + condition(rep) + "\n";
    } else if (name == "integrability") {
      const auto rows = integrability_tail(f, ensemble(), q.radii, q.q);
      std::string s = "r,tail\n";
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : rows) {
        s += num(r.radius) + "," + num(r.tail) + "\n";
        pts.emplace_back(r.radius, r.tail);
      }
      write_text_atomic(c.output / "integrability.csv", s);
      if (q.svg) write_svg(c.output / "integrability.svg", {"tail mass", "r", "tail", true, false}, pts);
    } else if (name == "translation") {
      std::vector<BochnerFunction> images;
      for (const auto& theta : ensemble()) images.push_back(f.apply(theta));
      const auto rows = translation_modulus(images, q.shifts);
      std::string s = "z,modulus\n";
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : rows) {
        s += num(r.shift) + "," + num(r.modulus) + "\n";
        pts.emplace_back(r.shift, r.modulus);
      }
      write_text_atomic(c.output / "translation.csv", s);
      if (q.svg) write_svg(c.output / "translation.svg", {"translation modulus", "z", "modulus", false, false}, pts);
    }
  }
  if (!summary.empty()) write_text_atomic(c.output / "probe.txt", summary);
}

int run(int argc, char** argv) {
  CLI::App app{"Dynamic inverse problems on discretized Bochner spaces"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path, out;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (INI)")->required();
  app.add_option("--out", out, "output directory, overrides [output] dir");
  auto* seed_opt = app.add_option("--seed", seed, "noise seed, overrides [noise] seed");
  app.add_flag("--quiet", quiet, "no progress output");
  auto* forward = app.add_subcommand("forward", "write a problem instance");
  auto* solve = app.add_subcommand("solve", "reconstruct from noisy data");
  auto* sweep = app.add_subcommand("sweep", "noise-level sweep with the parameter rule");
  auto* probe = app.add_subcommand("probe", "ill-posedness diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto config = load_config(config_path);
    if (!out.empty()) config.output = out;
    if (seed_opt->count() > 0) config.noise.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    std::string name;
    if (forward->parsed()) { name = "forward"; cmd_forward(config); }
    else if (solve->parsed()) { name = "solve"; cmd_solve(config); }
    else if (sweep->parsed()) { name = "sweep"; cmd_sweep(config); }
    else if (probe->parsed()) { name = "probe"; cmd_probe(config); }
    if (!quiet) {
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      std::fprintf(stderr, "%s: wrote %s in %.3f s\n", name.c_str(), config.output.string().c_str(),
                   took.count());
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dynip::cli
