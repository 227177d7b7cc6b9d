// psm: run scenarios, voxelize meshes, benchmark kernels, run validation suites.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psm/cli/config.hpp"
#include "psm/cli/scenario.hpp"
#include "psm/core/log.hpp"
#include "psm/core/version.hpp"
#include "psm/engine/benchmark.hpp"
#include "psm/engine/output.hpp"
#include "psm/validation/convergence.hpp"
#include "psm/validation/settling.hpp"
#include "psm/validation/volume_suite.hpp"

namespace fs = std::filesystem;
using namespace psm;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

const std::vector<std::string> kSuites{"volume-cube", "volume-bunny", "volume-blade", "settling", "convergence"};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

int cmd_run(const std::string& config, std::size_t workers, std::size_t steps, const std::string& out, int strict) {
  cli::ScenarioConfig cfg = cli::load_scenario(config);
  if (workers) cfg.workers = workers;
  if (steps) cfg.steps = steps;
  if (strict >= 0) cfg.strict_mesh = strict != 0;
  const fs::path dir = out.empty() ? cli::output_directory(cfg.output.directory) : fs::path(out);
  log::info("run " + config + " config_hash=" + cfg.hash + " workers=" + std::to_string(cfg.workers) +
            " steps=" + std::to_string(cfg.steps) + " out=" + dir.string());
  const auto sum = cli::run_scenario(cfg, dir);
  std::cout << "steps=" << sum.steps << '\n'
            << "mass_initial=" << format_double(sum.initial_mass) << '\n'
            << "mass_final=" << format_double(sum.final_mass) << '\n'
            << "mass_drift=" << format_double(sum.mass_drift()) << '\n'
            << "max_u_lattice=" << format_double(sum.max_u) << '\n'
            << "csv_rows=" << sum.csv_rows << '\n';
  for (const auto& f : sum.files) std::cout << "file=" << f << '\n';
  return 0;
}

int cmd_voxelize(const std::string& mesh_path, double dx, int s, const std::string& out, double cap_mb, bool strict) {
  const TriangleMesh mesh = [&] {
    TriangleMesh m = load_mesh_file(mesh_path, {strict});
    m.translate(m.volume_centroid() * -1.0);
    return m;
  }();
  VoxelizeOptions opts;
  opts.strict = strict;
  opts.memory_cap_bytes = static_cast<std::size_t>(cap_mb * 1024.0 * 1024.0);
  const GeometryField g = voxelize(mesh, dx, s, opts);
  write_geometry_cache(g, out);
  std::cout << "vertices=" << mesh.vertices.size() << '\n'
            << "raw_vertices=" << mesh.raw_vertex_count << '\n'
            << "faces=" << mesh.faces.size() << '\n'
            << "inside_bits=" << g.count_inside() << '\n'
            << "volume_estimate=" << format_double(g.inside_volume()) << '\n'
            << "mesh_volume=" << format_double(mesh.volume()) << '\n'
            << "cache=" << out << '\n';
  return 0;
}

BenchmarkConfig load_benchmark_config(const std::string& path) {
  BenchmarkConfig c;
  if (path.empty()) return c;
  const Json j = parse_json_file(path);
  JsonObject o(j, "");
  if (o.has("extents")) {
    const auto e = o.extents("extents");
    c.extents = {e[0], e[1], e[2]};
  }
  c.steps = o.count("steps", c.steps);
  c.warmup = o.count("warmup", c.warmup);
  c.repeats = o.count("repeats", c.repeats);
  c.workers = o.count("workers", c.workers);
  c.rotor_span = o.positive("rotor_span", c.rotor_span);
  c.rotor_center = o.vec3("rotor_center", c.rotor_center);
  c.revolutions_per_1000_steps = o.number("revolutions_per_1000_steps", c.revolutions_per_1000_steps);
  o.finish();
  return c;
}

int cmd_benchmark(const std::string& config, std::size_t workers, std::size_t steps, const std::string& out) {
  BenchmarkConfig c = load_benchmark_config(config);
  if (workers) c.workers = workers;
  if (steps) c.steps = steps;
  const BenchmarkReport rep = measure_mlups(c);
  std::ostringstream os;
  os << "version=" << kVersion << '\n'
     << "workers=" << c.workers << '\n'
     << "extents=" << c.extents.nx << 'x' << c.extents.ny << 'x' << c.extents.nz << '\n'
     << "steps=" << c.steps << '\n';
  rep.write(os);
  std::cout << os.str();
  if (!out.empty()) write_text(out, os.str());
  return 0;
}

std::string summary_line(const std::string& name, bool pass, const std::string& detail) {
  return "| " + name + " | " + (pass ? "pass" : "FAIL") + " | " + detail + " |\n";
}

int validate_volume(validation::VolumeGeometry g, const fs::path& dir, const std::string& mesh, std::size_t workers) {
  WorkerPool pool(workers);
  const auto table = validation::run_volume_table(g, {10, 20, 40}, {0, 1, 2, 3}, mesh, &pool);
  fs::create_directories(dir);
  const std::string name = "volume_" + std::string(to_string(g));
  {
    RunMetadata meta{"none", workers, {{"suite", name}}};
    CsvWriter csv((dir / (name + ".csv")).string(), meta,
                  std::vector<std::string>{"N", "s", "error", "mean_relative", "reference_volume", "status"});
    for (const auto& r : table.rows)
      csv.row(std::vector<double>{static_cast<double>(r.input.N), static_cast<double>(r.input.s), r.error,
                                  r.mean_relative, r.reference_volume, static_cast<double>(r.status)});
  }
  std::string md = "# " + name + "\n\n" + table.markdown() + "\n| check | result | detail |\n|---|---|---|\n";
  bool ok = true;
  bool skipped = false;
  for (const auto& r : table.rows) {
    if (r.status == validation::CaseStatus::skipped) {
      skipped = true;
      md += "| N=" + std::to_string(r.input.N) + " s=" + std::to_string(r.input.s) + " | skipped | " + r.message + " |\n";
      continue;
    }
    if (r.status == validation::CaseStatus::failed) {
      ok = false;
      md += summary_line("N=" + std::to_string(r.input.N) + " s=" + std::to_string(r.input.s), false, r.message);
      continue;
    }
    if (const auto ref = validation::reference_error(g, r.input.N, r.input.s)) {
      const bool band = validation::within_reference_band(r.error, *ref);
      char buf[96];
      std::snprintf(buf, sizeof buf, "error %.3e, reference %.3e", r.error, *ref);
      md += summary_line("N=" + std::to_string(r.input.N) + " s=" + std::to_string(r.input.s) + " band", band, buf);
      ok = ok && band;
    }
  }
  for (std::size_t is = 1; is < table.ss.size(); ++is) {
    bool mono = true;
    for (std::size_t iN = 1; iN < table.Ns.size(); ++iN) {
      const auto &a = table.at(iN - 1, is), &b = table.at(iN, is);
      if (a.status == validation::CaseStatus::ok && b.status == validation::CaseStatus::ok && b.error > a.error) mono = false;
    }
    md += summary_line("non-increasing in N, s=" + std::to_string(table.ss[is]), mono, "");
    ok = ok && mono;
  }
  write_text(dir / (name + ".md"), md);
  std::cout << md;
  if (skipped && g == validation::VolumeGeometry::mesh) return 0;
  return ok ? 0 : kExitRuntime;
}

int validate_settling(const fs::path& dir, const std::string& scale, const std::string& cases_dir, std::size_t workers) {
  fs::create_directories(dir);
  std::string md = "# settling (" + scale + ")\n\n| case | Re | max velocity | monotone rise | single plateau | reference | result |\n|---|---|---|---|---|---|---|\n";
  bool ok = true;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cases_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto c = validation::load_settling_case(f);
    validation::SettlingOptions o;
    o.scale = validation::parse_scale(scale);
    o.workers = workers;
    const auto r = validation::run_settling_case(c, o);
    {
      RunMetadata meta{"none", workers, {{"case", c.name}, {"scale", scale}}};
      CsvWriter csv((dir / ("settling_" + c.name + "_" + scale + ".csv")).string(), meta,
                    std::vector<std::string>{"step", "time", "height", "velocity", "hydro_force"});
      for (const auto& s : r.samples)
        csv.row(std::vector<double>{static_cast<double>(s.step), s.time, s.height, s.velocity, s.hydro_force});
    }
    const bool shape = r.monotone_rise && r.single_plateau;
    bool pass = r.status == validation::SettlingStatus::ok;
    std::string ref = "none";
    if (r.relative_error) {
      const bool within = *r.relative_error <= c.tolerance;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f m/s (%.1f%%, tol %.0f%%)", *r.reference_max, 100 * *r.relative_error,
                    100 * c.tolerance);
      ref = buf;
      pass = pass && within;
    }
    pass = pass && shape;
    std::string verdict = "pass";
    if (!pass) {
      verdict = "FAIL";
      if (!r.message.empty()) verdict += " " + r.message;
      if (!r.monotone_rise) verdict += " non-monotone rise";
      if (!r.single_plateau) verdict += " no single plateau";
      if (r.relative_error && *r.relative_error > c.tolerance) verdict += " outside reference tolerance";
    }
    char row[512];
    std::snprintf(row, sizeof row, "| %s | %.1f | %.5f m/s | %s | %s | %s | %s |\n", c.name.c_str(), c.reynolds(),
                  r.max_velocity, r.monotone_rise ? "yes" : "no", r.single_plateau ? "yes" : "no", ref.c_str(),
                  verdict.c_str());
    md += row;
    ok = ok && pass;
  }
  write_text(dir / ("settling_" + scale + ".md"), md);
  std::cout << md;
  return ok ? 0 : kExitRuntime;
}

int validate_convergence(const fs::path& dir, std::size_t workers) {
  fs::create_directories(dir);
  const validation::TaylorGreen tg{64, 0.8, 0.02};
  const auto rate = validation::taylor_green_decay_rate(tg, 0, static_cast<std::size_t>(0.5 / tg.velocity_decay_rate()), workers);
  const auto tgc = validation::taylor_green_convergence({16, 32, 64}, 0.8, 0.04, workers);
  const auto disk = validation::static_disk_convergence({16, 32, 64}, 128, workers);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# convergence\n\n| check | result | detail |\n|---|---|---|\n"
                "| decay rate 64^2 | %s | measured %.6e, analytic %.6e, error %.2f%% |\n"
                "| Taylor-Green order | %s | slope %.3f, errors %.3e %.3e %.3e |\n"
                "| static disk drag order | %s | slope %.3f, errors %.3e %.3e %.3e (reported) |\n",
                rate.relative_error <= 0.05 ? "pass" : "FAIL", rate.measured, rate.analytic, 100 * rate.relative_error,
                std::abs(tgc.slope - 2.0) <= 0.3 ? "pass" : "FAIL", tgc.slope, tgc.errors[0], tgc.errors[1], tgc.errors[2],
                disk.status == validation::ProbeStatus::ok ? "ok" : "inconclusive", disk.slope, disk.errors[0],
                disk.errors[1], disk.errors[2]);
  write_text(dir / "convergence.md", buf);
  std::cout << buf;
  return rate.relative_error <= 0.05 && std::abs(tgc.slope - 2.0) <= 0.3 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice Boltzmann solver with partially saturated cells for moving geometries"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Per-phase timings and debug output");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string config, out, mesh, scale = "quarter", suite;
  std::size_t workers = 0, steps = 0;
  double dx = 0.0, cap_mb = 4096.0;
  int s = 1;
  int strict = -1;

  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "Worker threads");
  run->add_option("--steps", steps, "Override step count");
  run->add_option("--out", out, "Output directory (else PSM_OUTPUT_DIR, else config)");
  run->add_flag("--strict-mesh,!--permissive-mesh", strict, "Reject non-watertight meshes");

  auto* vox = app.add_subcommand("voxelize", "Voxelize a mesh into a geometry-field cache");
  vox->add_option("--mesh", mesh, "STL or OBJ file")->required()->check(CLI::ExistingFile);
  vox->add_option("--dx", dx, "Lattice spacing (mesh units)")->required()->check(CLI::PositiveNumber);
  vox->add_option("--s", s, "Super-sampling factor")->check(CLI::Range(0, 10));
  vox->add_option("--out", out, "Cache file")->required();
  vox->add_option("--memory-cap-mb", cap_mb, "Geometry field memory cap")->check(CLI::PositiveNumber);
  vox->add_flag("--strict-mesh,!--permissive-mesh", strict, "Reject non-watertight meshes");

  auto* bench = app.add_subcommand("benchmark", "Measure MLUPS of the kernel variants");
  bench->add_option("--config", config, "Benchmark JSON")->check(CLI::ExistingFile);
  bench->add_option("--workers", workers, "Worker threads");
  bench->add_option("--steps", steps, "Timed steps per repeat");
  bench->add_option("--out", out, "Report file (key=value)");

  auto* val = app.add_subcommand("validate", "Run a validation suite");
  val->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(kSuites));
  val->add_option("--scale", scale, "Settling resolution")->check(CLI::IsMember({"full", "half", "quarter"}));
  val->add_option("--out", out, "Report directory");
  val->add_option("--mesh", mesh, "Mesh for volume-bunny (else PSM_BUNNY_MESH)");
  val->add_option("--cases", config, "Directory of settling case JSON files");
  val->add_option("--workers", workers, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  log::set_level(verbose ? log::Level::debug : (quiet ? log::Level::warn : log::Level::info));

  try {
    if (*run) return cmd_run(config, workers, steps, out, strict);
    if (*vox) return cmd_voxelize(mesh, dx, s, out, cap_mb, strict != 0);
    if (*bench) return cmd_benchmark(config, workers, steps, out);
    if (*val) {
      const fs::path dir = out.empty() ? cli::output_directory("validation") : fs::path(out);
      const std::size_t w = workers ? workers : 1;
      if (suite == "volume-cube") return validate_volume(validation::VolumeGeometry::cube, dir, "", w);
      if (suite == "volume-blade") return validate_volume(validation::VolumeGeometry::blade, dir, "", w);
      if (suite == "volume-bunny") {
        if (mesh.empty())
          if (const char* env = std::getenv("PSM_BUNNY_MESH")) mesh = env;
        return validate_volume(validation::VolumeGeometry::mesh, dir, mesh, w);
      }
      if (suite == "settling") return validate_settling(dir, scale, config.empty() ? "configs/settling" : config, w);
      if (suite == "convergence") return validate_convergence(dir, w);
    }
  } catch (const ConfigError& e) {
    log::error(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    log::error(e.what());
    return kExitConfig;
  } catch (const Error& e) {
    log::error(e.what());
    return kExitRuntime;
  }
  return 0;
}
