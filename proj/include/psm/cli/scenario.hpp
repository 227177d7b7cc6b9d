#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "psm/cli/config.hpp"
#include "psm/core/log.hpp"
#include "psm/engine/output.hpp"
#include "psm/engine/simulation.hpp"
#include "psm/geometry/mesh.hpp"
#include "psm/geometry/voxelizer.hpp"

namespace psm::cli {

/// Geometry field plus mass properties of one configured body.
struct BuiltBody {
  std::shared_ptr<const GeometryField> geometry;
  double volume = 0.0;
  Mat3 unit_inertia = Mat3::identity();  ///< inertia per unit density
};

inline BuiltBody build_geometry(const BodyConfig& b, double dx, int dim, bool strict_mesh) {
  BuiltBody out;
  VoxelizeOptions opts;
  opts.strict = strict_mesh;
  const int s = b.supersampling;
  auto mesh_body = [&](TriangleMesh mesh) {
    mesh.translate(mesh.volume_centroid() * -1.0);
    out.volume = mesh.volume();
    out.unit_inertia = mesh_inertia(mesh, 1.0);
    out.geometry = std::make_shared<const GeometryField>(voxelize(mesh, dx, s, opts));
  };
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, SphereShape>) {
          const double r = shape.radius;
          out.volume = 4.0 / 3.0 * std::numbers::pi * r * r * r;
          out.unit_inertia = sphere_inertia(out.volume, r);
          out.geometry = std::make_shared<const GeometryField>(voxelize_sphere(r, dx, s, opts));
        } else if constexpr (std::is_same_v<T, CubeShape>) {
          mesh_body(make_cube(shape.side));
        } else if constexpr (std::is_same_v<T, BoxShape>) {
          mesh_body(make_box(shape.half));
        } else if constexpr (std::is_same_v<T, BladeShape>) {
          mesh_body(make_twisted_blade(shape.length, shape.chord, shape.thickness, shape.twist, 24));
        } else if constexpr (std::is_same_v<T, DiskShape>) {
          if (dim != 2) throw ConfigError("bodies." + b.name + ".shape", "disk primitives require the D2Q9 stencil");
          const double r = shape.radius;
          out.volume = std::numbers::pi * r * r * dx;  // one cell deep
          const double i = 0.5 * out.volume * r * r;
          out.unit_inertia = Mat3::diagonal(0.5 * i, 0.5 * i, i);
          const Aabb box{{-r, -r, -0.5 * dx}, {r, r, 0.5 * dx}};
          out.geometry = std::make_shared<const GeometryField>(voxelize_predicate(
              box, std::hypot(r, 0.5 * dx), dx, s, [r](const Vec3& p) { return p.x * p.x + p.y * p.y < r * r; }, opts));
        } else {
          TriangleMesh mesh = load_mesh_file(shape.path, {strict_mesh});
          mesh.scale(shape.scale);
          mesh_body(std::move(mesh));
        }
      },
      b.shape);
  if (!b.geometry_cache.empty()) {
    if (std::filesystem::exists(b.geometry_cache)) {
      auto cached = read_geometry_cache(b.geometry_cache);
      if (cached.s() == s && std::abs(cached.dx_lbm() - dx) <= 1e-12 * dx) {
        out.geometry = std::make_shared<const GeometryField>(std::move(cached));
        log::info("body " + b.name + ": geometry field read from " + b.geometry_cache.string());
      } else {
        log::warn("body " + b.name + ": cache " + b.geometry_cache.string() + " does not match dx/s, ignored");
      }
    } else {
      write_geometry_cache(*out.geometry, b.geometry_cache);
    }
  }
  return out;
}

inline RigidBody make_body(const BodyConfig& b, const BuiltBody& g) {
  RigidBody body;
  body.name = b.name;
  body.geometry = g.geometry;
  body.initial_pose.rotation = rotation_about(b.orientation_axis, b.orientation_angle);
  body.initial_pose.translation = b.position;
  body.motion = b.motion;
  body.volume = g.volume;
  body.density = b.density;
  body.mass = b.density * g.volume;
  Mat3 I = g.unit_inertia;
  for (auto& v : I.m) v *= b.density;
  body.inertia_body = I;
  return body;
}

/// Output directory with the environment override applied.
inline std::filesystem::path output_directory(const std::filesystem::path& configured) {
  if (const char* env = std::getenv("PSM_OUTPUT_DIR"); env && *env) return env;
  return configured;
}

struct RunSummary {
  std::uint64_t steps = 0;
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double max_u = 0.0;
  std::size_t csv_rows = 0;
  std::vector<std::string> files;

  [[nodiscard]] double mass_drift() const noexcept {
    return initial_mass != 0.0 ? (final_mass - initial_mass) / initial_mass : 0.0;
  }
};

template <Stencil S>
RunSummary run_scenario_with(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  Simulation<S> sim(cfg.domain, cfg.numerics, cfg.workers);
  for (const auto& b : cfg.bodies) sim.add_body(make_body(b, build_geometry(b, cfg.domain.dx, S::D, cfg.strict_mesh)));
  sim.initialize_uniform(cfg.initial_density, sim.units().velocity_to_lattice(cfg.initial_velocity));

  const UnitConverter& u = sim.units();
  log::info("lattice: tau=" + format_double(sim.tau()) + " nu_lattice=" + format_double(u.viscosity_to_lattice(cfg.domain.nu)) +
            " force_scale=" + format_double(u.force_to_si({1, 0, 0}).x) + " N");

  std::filesystem::create_directories(out_dir);
  RunMetadata meta{cfg.hash, cfg.workers, {{"stencil", std::string(S::name)}}};
  RunSummary sum;
  sum.initial_mass = sim.total_mass();

  std::unique_ptr<CsvWriter> series;
  std::vector<std::unique_ptr<CsvWriter>> traces;
  if (cfg.output.csv) {
    series = std::make_unique<CsvWriter>((out_dir / "steps.csv").string(), meta, step_series_columns(sim.bodies().size()));
    sum.files.push_back(series->path());
  }
  if (cfg.output.body_trace)
    for (const auto& b : sim.bodies()) {
      const auto cols = body_trace_columns();
      traces.push_back(std::make_unique<CsvWriter>((out_dir / ("body_" + b.name + ".csv")).string(), meta, cols));
      sum.files.push_back(traces.back()->path());
    }

  for (std::size_t n = 1; n <= cfg.steps; ++n) {
    const bool diag = n % cfg.output.interval == 0 || n == cfg.steps;
    const StepReport& rep = sim.step(diag);
    for (std::size_t b = 0; b < traces.size(); ++b)
      traces[b]->row(body_trace_row(rep.step, cfg.domain.dt, sim.bodies()[b], rep.bodies[b]));
    if (n % cfg.output.interval == 0) {
      if (series) series->row(step_series_row(rep, cfg.domain.dt));
      std::string line = "step " + std::to_string(rep.step) + " mass=" + format_double(rep.mass) +
                         " max_u=" + format_double(rep.max_u);
      log::info(line);
      std::string phases = "phases(ns):";
      for (std::size_t p = 0; p < rep.phase_ns.size(); ++p)
        phases += " " + std::string(kPhaseNames[p]) + "=" + std::to_string(rep.phase_ns[p]);
      log::debug(phases);
    }
    if (cfg.output.vtk_interval > 0 && n % cfg.output.vtk_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "field_%08zu.vtk", n);
      write_vtk(sim, (out_dir / name).string(), meta);
      sum.files.push_back((out_dir / name).string());
    }
    if (diag) sum.max_u = rep.max_u;
  }
  if (series) {
    series->flush();
    sum.csv_rows = series->rows();
  }
  for (auto& t : traces) t->flush();
  sum.steps = sim.steps_done();
  sum.final_mass = sim.total_mass();
  return sum;
}

inline RunSummary run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.stencil == "D2Q9") return run_scenario_with<D2Q9>(cfg, out_dir);
  return run_scenario_with<D3Q19>(cfg, out_dir);
}

}  // namespace psm::cli
