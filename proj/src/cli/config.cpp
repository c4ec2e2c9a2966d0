#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dynip/cli.hpp"
#include "dynip/errors.hpp"
#include "dynip/io.hpp"

namespace dynip::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"problem",
     {"kind", "n_t", "n_x", "T", "width", "window", "decay", "kernel_csv", "mask_csv", "data_csv"}},
    {"noise", {"delta", "seed", "fraction", "per_section"}},
    {"solver",
     {"method", "alpha", "rule_scale", "rule_exponent", "tolerance", "cg_max_iter", "step",
      "max_iter", "tau", "memory", "noise_split", "static_source", "skip_satisfied",
      "residual_tolerance", "power_iterations", "power_seed"}},
    {"probe",
     {"probes", "time_index", "vectors", "radii", "q", "ensemble_size", "ensemble", "shifts",
      "svg"}},
    {"sweep", {"deltas"}},
    {"output", {"dir"}},
};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

class Section {
 public:
  Section(std::string name, const pt::ptree* node) : name_(std::move(name)), node_(node) {}

  std::optional<std::string> text(const std::string& key) const {
    if (!node_) return std::nullopt;
    const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    auto s = *v;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) fail(qualified(key), "empty value");
    return s;
  }

  std::optional<double> real(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    return parse_real(key, *s);
  }

  std::optional<std::uint64_t> count(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    std::uint64_t v = 0;
    const auto res = std::from_chars(s->data(), s->data() + s->size(), v);
    if (res.ec != std::errc{} || res.ptr != s->data() + s->size())
      fail(qualified(key), "expected a non-negative integer, got '" + *s + "'");
    return v;
  }

  std::optional<bool> flag(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "yes" || *s == "1") return true;
    if (*s == "false" || *s == "no" || *s == "0") return false;
    fail(qualified(key), "expected true or false, got '" + *s + "'");
  }

  std::optional<std::vector<double>> reals(const std::string& key) const {
    const auto words = list(key);
    if (!words) return std::nullopt;
    std::vector<double> out;
    for (const auto& w : *words) out.push_back(parse_real(key, w));
    return out;
  }

  std::optional<std::vector<std::string>> list(const std::string& key) const {
    const auto s = text(key);
    if (!s) return std::nullopt;
    std::vector<std::string> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) fail(qualified(key), "empty list entry");
      out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  double parse_real(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
      fail(qualified(key), "expected a finite number, got '" + s + "'");
    return v;
  }

  std::string name_;
  const pt::ptree* node_;
};

void require(bool ok, const Section& s, const std::string& key, const std::string& what) {
  if (!ok) fail(s.qualified(key), what);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

bool grid_multiple(double z, double dt) {
  const double k = std::round(z / dt);
  return std::abs(z - k * dt) <= 1e-9 * std::max(1.0, std::abs(z));
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [name, node] : tree) {
    const auto it = kSchema.find(name);
    if (!node.data().empty()) fail(name, "entries must sit inside a [section]");
    if (it == kSchema.end()) fail(name, "unknown section");
    for (const auto& [key, value] : node) {
      (void)value;
      if (!it->second.count(key)) fail(name + "." + key, "unknown key");
    }
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(name, child ? &*child : nullptr);
  };

  ExperimentConfig c;

  const auto problem = section("problem");
  auto& p = c.problem;
  if (auto v = problem.text("kind")) p.kind = *v;
  require(p.kind == "dct" || p.kind == "mpi" || p.kind == "nonuniform" || p.kind == "identity",
          problem, "kind", "expected dct, mpi, nonuniform or identity");
  if (auto v = problem.count("n_t")) p.n_t = *v;
  if (auto v = problem.count("n_x")) p.n_x = *v;
  require(p.n_t >= 1, problem, "n_t", "must be at least 1");
  require(p.n_x >= 1, problem, "n_x", "must be at least 1");
  if (auto v = problem.real("T")) p.horizon = *v;
  require(p.horizon > 0.0, problem, "T", "must be positive");
  if (auto v = problem.real("width")) {
    require(p.kind == "dct" || p.kind == "nonuniform", problem, "width", "only for dct and nonuniform");
    p.width = *v;
  }
  require(p.width > 0.0, problem, "width", "must be positive");
  if (auto v = problem.count("window")) {
    require(p.kind == "dct", problem, "window", "only for dct");
    require(*v >= 1 && *v <= p.n_x, problem, "window", "must lie in [1, n_x]");
    p.window = *v;
  }
  if (auto v = problem.real("decay")) {
    require(p.kind == "mpi", problem, "decay", "only for mpi");
    p.decay = *v;
  }
  require(p.decay > 0.0, problem, "decay", "must be positive");
  if (auto v = problem.text("kernel_csv")) {
    require(p.kind == "mpi", problem, "kernel_csv", "only for mpi");
    require(!problem.text("decay"), problem, "kernel_csv", "conflicts with decay");
    p.kernel_csv = resolve(base, *v);
  }
  if (auto v = problem.text("mask_csv")) {
    require(p.kind == "dct", problem, "mask_csv", "only for dct");
    require(!p.window, problem, "mask_csv", "conflicts with window");
    p.mask_csv = resolve(base, *v);
  }
  if (auto v = problem.text("data_csv")) p.data_csv = resolve(base, *v);

  const auto noise = section("noise");
  if (auto v = noise.real("delta")) c.noise.delta = *v;
  require(c.noise.delta > 0.0, noise, "delta", "must be positive");
  if (auto v = noise.count("seed")) c.noise.seed = *v;
  if (auto v = noise.real("fraction")) c.noise.fraction = *v;
  require(c.noise.fraction > 0.0 && c.noise.fraction <= 1.0, noise, "fraction", "must lie in (0, 1]");
  if (auto v = noise.flag("per_section")) c.noise.per_section = *v;

  const auto solver = section("solver");
  auto& s = c.solver;
  if (auto v = solver.text("method")) s.method = *v;
  const bool tikhonov = s.method == "tikhonov_temporal" || s.method == "tikhonov_uniform";
  const bool kaczmarz = s.method == "landweber_kaczmarz" || s.method == "kaczmarz_multi";
  require(tikhonov || kaczmarz, solver, "method",
          "expected tikhonov_temporal, tikhonov_uniform, landweber_kaczmarz or kaczmarz_multi");
  if (auto v = solver.real("alpha")) {
    require(tikhonov, solver, "alpha", "only for Tikhonov methods");
    require(*v > 0.0, solver, "alpha", "must be positive");
    s.alpha = *v;
  }
  if (auto v = solver.real("rule_scale")) s.rule.scale = *v;
  require(s.rule.scale > 0.0, solver, "rule_scale", "must be positive");
  if (auto v = solver.real("rule_exponent")) s.rule.exponent = *v;
  require(s.rule.exponent > 0.0 && s.rule.exponent < 2.0, solver, "rule_exponent",
          "must lie in (0, 2)");
  if (auto v = solver.real("tolerance")) s.tolerance = *v;
  require(s.tolerance > 0.0 && s.tolerance < 1.0, solver, "tolerance", "must lie in (0, 1)");
  if (auto v = solver.count("cg_max_iter")) s.cg_max_iter = *v;
  if (auto v = solver.text("step")) {
    if (*v != "auto") {
      const auto w = solver.real("step");
      require(*w > 0.0, solver, "step", "must be positive or auto");
      s.step = *w;
    }
  }
  if (auto v = solver.count("max_iter")) s.max_iter = *v;
  if (auto v = solver.real("tau")) s.tau = *v;
  require(s.tau >= 1.0, solver, "tau", "must be at least 1");
  if (auto v = solver.count("memory")) {
    require(s.method == "kaczmarz_multi", solver, "memory", "only for kaczmarz_multi");
    s.memory = *v;
  }
  require(s.memory >= 1, solver, "memory", "must be at least 1");
  if (auto v = solver.text("noise_split")) {
    require(*v == "share" || *v == "global", solver, "noise_split", "expected share or global");
    s.noise_split = *v == "share" ? NoiseSplit::share : NoiseSplit::global;
  }
  if (auto v = solver.flag("static_source")) {
    require(!*v || s.method != "tikhonov_temporal", solver, "static_source",
            "tracking has no static-source mode");
    s.static_source = *v;
  }
  if (auto v = solver.flag("skip_satisfied")) s.skip_satisfied = *v;
  if (auto v = solver.real("residual_tolerance")) {
    require(*v > 0.0, solver, "residual_tolerance", "must be positive");
    s.residual_tolerance = *v;
  }
  if (auto v = solver.count("power_iterations")) s.power_iterations = *v;
  require(s.power_iterations >= 1, solver, "power_iterations", "must be at least 1");
  if (auto v = solver.count("power_seed")) s.power_seed = *v;

  const auto probe = section("probe");
  auto& q = c.probe;
  if (auto v = probe.list("probes")) {
    for (const auto& name : *v)
      require(name == "temporal_spectrum" || name == "stacked_spectrum" || name == "integrability" ||
                  name == "translation",
              probe, "probes", "unknown probe '" + name + "'");
    q.probes = *v;
  }
  if (auto v = probe.count("time_index")) {
    require(*v < p.n_t, probe, "time_index", "must be below n_t");
    q.time_index = *v;
  }
  if (auto v = probe.flag("vectors")) q.vectors = *v;
  if (auto v = probe.reals("radii")) q.radii = *v;
  for (std::size_t k = 0; k < q.radii.size(); ++k)
    require(q.radii[k] > 0.0 && (k == 0 || q.radii[k] > q.radii[k - 1]), probe, "radii",
            "must be positive and ascending");
  if (auto v = probe.real("q")) q.q = *v;
  require(q.q >= 1.0, probe, "q", "must be at least 1");
  if (auto v = probe.count("ensemble_size")) q.ensemble_size = *v;
  require(q.ensemble_size >= 1, probe, "ensemble_size", "must be at least 1");
  if (auto v = probe.text("ensemble")) {
    require(*v == "random" || *v == "constant", probe, "ensemble", "expected random or constant");
    q.constant_ensemble = *v == "constant";
  }
  const double dt = p.horizon / static_cast<double>(p.n_t);
  if (auto v = probe.reals("shifts")) {
    q.shifts = *v;
    for (double z : q.shifts)
      require(z >= 0.0 && z < p.horizon && grid_multiple(z, dt), probe, "shifts",
              "must be grid multiples of T / n_t in [0, T)");
  } else {
    for (std::size_t k = 0; k < std::min<std::size_t>(5, p.n_t); ++k)
      q.shifts.push_back(static_cast<double>(k) * dt);
  }
  if (auto v = probe.flag("svg")) q.svg = *v;

  const auto sweep = section("sweep");
  if (auto v = sweep.reals("deltas")) c.deltas = *v;
  require(!c.deltas.empty(), sweep, "deltas", "must not be empty");
  for (std::size_t k = 0; k < c.deltas.size(); ++k)
    require(c.deltas[k] > 0.0 && (k == 0 || c.deltas[k] < c.deltas[k - 1]), sweep, "deltas",
            "must be positive and descending");

  const auto output = section("output");
  if (auto v = output.text("dir")) c.output = *v;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.parent_path());
}

}  // namespace dynip::cli
