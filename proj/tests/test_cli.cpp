#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dynip/cli.hpp"
#include "dynip/errors.hpp"
#include "dynip/io.hpp"

using namespace dynip;
using namespace dynip::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dynip");
  args.push_back("--quiet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end - pos);
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    pos = end == std::string::npos ? text.size() : end + 1;
  }
  return kv;
}

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  for (char c : csv) n += c == '\n';
  return n - 1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults and strict parsing") {
    const auto c = parse_config("");
    CHECK(c.problem.kind == "dct");
    CHECK(c.solver.method == "tikhonov_uniform");
    CHECK(c.solver.tau == 2.0);
    CHECK(c.solver.noise_split == NoiseSplit::share);
    CHECK(c.deltas.size() == 4);

    CHECK(message_of("[problem]\ncolour = red\n").find("problem.colour") != std::string::npos);
    CHECK(message_of("[extras]\nx = 1\n").find("extras") != std::string::npos);
    CHECK(message_of("stray = 1\n").find("stray") != std::string::npos);
    CHECK(message_of("[noise]\ndelta = -1\n").find("noise.delta") != std::string::npos);
    CHECK(message_of("[noise]\ndelta = abc\n").find("noise.delta") != std::string::npos);
    CHECK(message_of("[problem]\nn_x = 8\nwindow = 9\n").find("problem.window") != std::string::npos);
    CHECK(message_of("[problem]\nkind = mpi\nwindow = 2\n").find("problem.window") != std::string::npos);
    CHECK(message_of("[solver]\nrule_exponent = 2\n").find("solver.rule_exponent") != std::string::npos);
    CHECK(message_of("[solver]\nmethod = gauss\n").find("solver.method") != std::string::npos);
    CHECK(message_of("[solver]\nmethod = tikhonov_temporal\nstatic_source = true\n")
              .find("solver.static_source") != std::string::npos);
    CHECK(message_of("[solver]\ntau = 0.5\n").find("solver.tau") != std::string::npos);
    CHECK(message_of("[solver]\nstep = 0\n").find("solver.step") != std::string::npos);
    CHECK(message_of("[sweep]\ndeltas = 0.01, 0.1\n").find("sweep.deltas") != std::string::npos);
    CHECK(message_of("[probe]\nradii = 2, 1\n").find("probe.radii") != std::string::npos);
    CHECK(message_of("[probe]\nprobes = magic\n").find("probe.probes") != std::string::npos);
    CHECK(message_of("[problem]\nn_t = 4\n[probe]\nshifts = 0.1\n").find("probe.shifts") != std::string::npos);
    CHECK(message_of("[problem]\nn_t = 4\n[probe]\ntime_index = 4\n").find("probe.time_index") !=
          std::string::npos);
    CHECK(message_of("[noise]\nseed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
    CHECK(message_of("[noise]\nper_section = maybe\n").find("noise.per_section") != std::string::npos);

    const auto k = parse_config("[solver]\nmethod = kaczmarz_multi\nmemory = 4\nstep = auto\n");
    CHECK(k.solver.memory == 4);
    CHECK(!k.solver.step.has_value());
    const auto shifts = parse_config("[problem]\nn_t = 4\n[probe]\nshifts = 0, 0.25, 0.5\n");
    CHECK(shifts.probe.shifts == std::vector<double>{0.0, 0.25, 0.5});
  }

  TEST_CASE("shipped configs load") {
    const fs::path dir = DYNIP_SOURCE_DIR "/configs";
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".ini") continue;
      CHECK_NOTHROW(build_problem(load_config(entry.path()).problem));
      ++n;
    }
    CHECK(n >= 4);
  }

  TEST_CASE("forward writes a reproducible instance") {
    TempDir tmp("dynip_cli_forward");
    auto c = parse_config("[problem]\nkind = nonuniform\nn_t = 8\nn_x = 4\n[noise]\ndelta = 0.1\nseed = 5\n");
    c.output = tmp.path / "a";
    cmd_forward(c);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(c.output)) ++files;
    CHECK(files == 4);
    const auto meta = read_text(c.output / "meta.txt");
    CHECK(meta.find("delta=0.1\n") != std::string::npos);
    const auto metric = SpaceMetric{0.25, 2.0};
    const auto clean = read_csv(c.output / "data_clean.csv", metric);
    const auto noisy = read_csv(c.output / "data_noisy.csv", metric);
    CHECK(bochner_norm(noisy - clean) == doctest::Approx(0.099).epsilon(1e-12));

    c.output = tmp.path / "b";
    cmd_forward(c);
    for (const char* f : {"truth.csv", "data_clean.csv", "data_noisy.csv", "meta.txt"})
      CHECK(read_text(tmp.path / "a" / f) == read_text(tmp.path / "b" / f));
  }

  TEST_CASE("solve on the identity smoke config") {
    TempDir tmp("dynip_cli_identity");
    auto c = parse_config("[problem]\nkind = identity\nn_t = 4\nn_x = 3\n[noise]\ndelta = 0.1\nseed = 3\n"
                          "[solver]\nalpha = 1\n");
    c.output = tmp.path;
    cmd_solve(c);
    const auto inst = build_problem(c.problem);
    const auto y = add_noise(inst.data, {0.1, 3});
    const auto x = read_csv(tmp.path / "reconstruction.csv", inst.space.metric());
    for (std::size_t k = 0; k < y.values().size(); ++k)
      CHECK(std::abs(x.values()[k] - y.values()[k] / 2.0) <= 1e-10);
    const auto report = key_values(read_text(tmp.path / "report.txt"));
    CHECK(report.count("relative_error") == 1);
    CHECK(report.at("stop") == "tolerance");
    const auto trace = read_text(tmp.path / "trace.csv");
    CHECK(trace.rfind("iter,subproblem,residual,alpha,error\n", 0) == 0);

    // Emitted CSV round-trips through the reader.
    CHECK(to_csv(x) == read_text(tmp.path / "reconstruction.csv"));
  }

  TEST_CASE("tracking and uniform agree through the runner") {
    TempDir tmp("dynip_cli_decouple");
    const std::string base = "[problem]\nkind = dct\nn_t = 8\nn_x = 16\nwindow = 8\n[noise]\ndelta = 0.01\n";
    auto t = parse_config(base + "[solver]\nmethod = tikhonov_temporal\nalpha = 0.001\n");
    auto u = parse_config(base + "[solver]\nmethod = tikhonov_uniform\nalpha = 0.001\n");
    t.output = tmp.path / "t";
    u.output = tmp.path / "u";
    cmd_solve(t);
    cmd_solve(u);
    const SpaceMetric m{1.0 / 16, 2.0};
    const auto a = read_csv(t.output / "reconstruction.csv", m);
    const auto b = read_csv(u.output / "reconstruction.csv", m);
    CHECK(bochner_norm(a - b) <= 1e-8 * bochner_norm(a));
  }

  TEST_CASE("kaczmarz with no sweeps returns the start") {
    TempDir tmp("dynip_cli_kaczmarz");
    auto c = parse_config("[problem]\nkind = mpi\nn_t = 8\nn_x = 4\n[solver]\nmethod = landweber_kaczmarz\n"
                          "max_iter = 0\n");
    c.output = tmp.path;
    cmd_solve(c);
    const auto report = key_values(read_text(tmp.path / "report.txt"));
    CHECK(report.at("stop") == "max_iter");
    CHECK(report.at("iterations") == "0");
    const auto x = read_csv(tmp.path / "reconstruction.csv", {0.25, 2.0});
    for (double v : x.values()) CHECK(v == 0.0);
  }

  TEST_CASE("sweep") {
    TempDir tmp("dynip_cli_sweep");
    auto c = parse_config("[problem]\nkind = dct\nn_t = 32\nn_x = 32\nwindow = 32\n[noise]\nseed = 1\n");
    c.output = tmp.path / "full";
    cmd_sweep(c);
    const auto text = read_text(c.output / "sweep.csv");
    const auto rows = read_sweep_csv(text);
    REQUIRE(rows.size() == 4);
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) CHECK(rows[k + 1].error < rows[k].error);
    for (const auto& r : rows) CHECK(*r.alpha == r.delta);
    CHECK(sweep_csv(rows) == text);
    CHECK(sweep_svg(rows) == read_text(c.output / "sweep.svg"));

    auto one = parse_config("[problem]\nkind = identity\nn_t = 4\nn_x = 2\n[sweep]\ndeltas = 0.1\n");
    one.output = tmp.path / "one";
    cmd_sweep(one);
    CHECK(read_sweep_csv(read_text(one.output / "sweep.csv")).size() == 1);

    auto kaczmarz = parse_config("[problem]\nkind = nonuniform\nn_t = 8\nn_x = 8\n[solver]\n"
                                 "method = landweber_kaczmarz\n[sweep]\ndeltas = 0.1, 0.01\n");
    kaczmarz.output = tmp.path / "k";
    cmd_sweep(kaczmarz);
    const auto krows = read_sweep_csv(read_text(kaczmarz.output / "sweep.csv"));
    CHECK(!krows[0].alpha.has_value());

    auto fixed = parse_config("[solver]\nalpha = 0.1\n");
    CHECK_THROWS_AS(cmd_sweep(fixed), ConfigError);
  }

  TEST_CASE("probes") {
    TempDir tmp("dynip_cli_probe");
    auto id = parse_config("[problem]\nkind = identity\nn_t = 3\nn_x = 4\n[probe]\nprobes = temporal_spectrum\n");
    id.output = tmp.path / "id";
    cmd_probe(id);
    for (int i = 0; i < 3; ++i) {
      const auto csv = read_text(id.output / ("temporal_spectrum_" + std::to_string(i) + ".csv"));
      CHECK(csv == "k,sigma\n1,1\n2,1\n3,1\n4,1\n");
    }

    auto dct = parse_config("[problem]\nkind = dct\nn_t = 8\nn_x = 16\nwindow = 4\n[probe]\n"
                            "probes = stacked_spectrum\nsvg = false\n");
    dct.output = tmp.path / "dct";
    cmd_probe(dct);
    CHECK(data_rows(read_text(dct.output / "stacked_spectrum.csv")) == 8 * 16);
    CHECK(!fs::exists(dct.output / "stacked_spectrum.svg"));

    double previous = 0.0;
    for (std::size_t n_t : {16, 32, 64}) {
      auto nu = parse_config("[problem]\nkind = nonuniform\nn_t = " + std::to_string(n_t) +
                             "\nn_x = 8\n[probe]\nprobes = integrability\nensemble = constant\nradii = 1\n"
                             "q = 1\nensemble_size = 1\n");
      nu.output = tmp.path / ("nu" + std::to_string(n_t));
      cmd_probe(nu);
      const auto csv = read_text(nu.output / "integrability.csv");
      const double tail = std::stod(csv.substr(csv.find(',', 7) + 1));
      CHECK(tail > previous);
      previous = tail;
    }

    auto tr = parse_config("[problem]\nkind = dct\nn_t = 8\nn_x = 8\n[probe]\nprobes = translation\n"
                           "ensemble = constant\n");
    tr.output = tmp.path / "tr";
    cmd_probe(tr);
    CHECK(read_text(tr.output / "translation.csv").rfind("z,modulus\n0,0\n", 0) == 0);

    auto bad = parse_config("[problem]\nkind = mpi\nn_t = 4\nn_x = 4\n[probe]\nprobes = temporal_spectrum\n");
    bad.output = tmp.path / "bad";
    CHECK_THROWS_AS(cmd_probe(bad), Unsupported);
  }

  TEST_CASE("exit codes") {
    TempDir tmp("dynip_cli_exit");
    const auto cfg = tmp.path / "ok.ini";
    write_text_atomic(cfg, "[problem]\nkind = identity\nn_t = 2\nn_x = 2\n");
    CHECK(invoke({"solve", "--config", cfg.string(), "--out", (tmp.path / "o").string()}) == 0);
    CHECK(fs::exists(tmp.path / "o" / "report.txt"));

    const auto bad = tmp.path / "bad.ini";
    write_text_atomic(bad, "[problem]\nsize = 3\n");
    CHECK(invoke({"solve", "--config", bad.string()}) == 2);
    CHECK(invoke({"solve", "--config", cfg.string(), "--bogus"}) == 2);
    CHECK(invoke({"--config", cfg.string()}) == 2);

    const auto unsupported = tmp.path / "mpi.ini";
    write_text_atomic(unsupported, "[problem]\nkind = mpi\nn_t = 4\nn_x = 4\n[probe]\nprobes = temporal_spectrum\n");
    CHECK(invoke({"probe", "--config", unsupported.string(), "--out", (tmp.path / "p").string()}) == 3);

    CHECK(invoke({"solve", "--config", (tmp.path / "missing.ini").string()}) == 4);
    write_text_atomic(tmp.path / "file", "x");
    CHECK(invoke({"solve", "--config", cfg.string(), "--out", (tmp.path / "file" / "sub").string()}) == 4);

    // --seed overrides the config.
    CHECK(invoke({"forward", "--config", cfg.string(), "--out", (tmp.path / "s1").string(), "--seed", "9"}) == 0);
    CHECK(read_text(tmp.path / "s1" / "meta.txt").find("seed=9\n") != std::string::npos);
  }

  TEST_CASE("kernel and mask files through the config") {
    TempDir tmp("dynip_cli_files");
    write_text_atomic(tmp.path / "mask.csv", "0,1\n1,2\n2,3\n3,0\n");
    write_text_atomic(tmp.path / "kernel.csv", "1\n0.5\n0.25\n0.125\n");
    write_text_atomic(tmp.path / "dct.ini", "[problem]\nkind = dct\nn_t = 4\nn_x = 4\nmask_csv = mask.csv\n");
    write_text_atomic(tmp.path / "mpi.ini", "[problem]\nkind = mpi\nn_t = 4\nn_x = 4\nkernel_csv = kernel.csv\n");
    const auto d = build_problem(load_config(tmp.path / "dct.ini").problem);
    CHECK(d.data.at(0)[2] == 0.0);
    CHECK(d.data.at(0)[0] != 0.0);
    const auto m = build_problem(load_config(tmp.path / "mpi.ini").problem);
    CHECK(m.forward->kernel()->samples()[1] == 0.5);
    write_text_atomic(tmp.path / "short.ini", "[problem]\nkind = mpi\nn_t = 5\nn_x = 4\nkernel_csv = kernel.csv\n");
    CHECK_THROWS_AS(build_problem(load_config(tmp.path / "short.ini").problem), DimensionError);
  }
}
