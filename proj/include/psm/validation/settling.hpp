#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psm/bodies/rigid_body.hpp"
#include "psm/core/error.hpp"
#include "psm/core/json_config.hpp"
#include "psm/core/log.hpp"
#include "psm/engine/simulation.hpp"
#include "psm/geometry/voxelizer.hpp"

namespace psm::validation {

/// A sphere settling from rest in a closed box of quiescent oil. SI units.
struct SettlingCase {
  std::string name;
  double re_label = 0.0;
  double fluid_density = 0.0;
  double dynamic_viscosity = 0.0;
  double sphere_diameter = 0.0;
  double sphere_density = 0.0;
  Vec3 container{};
  double release_height = 0.0;      ///< initial sphere center above the bottom
  double gravity = 9.81;
  double terminal_velocity = 0.0;   ///< unbounded terminal velocity, defines Re
  GridDims full_extents{135, 135, 216};
  double tolerance = 0.05;          ///< relative tolerance on the max velocity
  std::filesystem::path reference_csv;  ///< (time, velocity) samples, optional

  [[nodiscard]] double kinematic_viscosity() const noexcept { return dynamic_viscosity / fluid_density; }
  [[nodiscard]] double reynolds() const noexcept {
    return fluid_density * terminal_velocity * sphere_diameter / dynamic_viscosity;
  }

  /// The labeled Re must match the parameters within 2%.
  void validate() const {
    if (!(std::abs(reynolds() - re_label) <= 0.02 * re_label))
      throw ConfigError("re_label", "labeled Re " + std::to_string(re_label) + " does not match computed Re " +
                                        std::to_string(reynolds()));
    if (!(release_height > 0.5 * sphere_diameter && release_height < container.z - 0.5 * sphere_diameter))
      throw ConfigError("sphere.release_height", "sphere must start inside the container");
  }
};

inline SettlingCase parse_settling_case(const Json& j, const std::filesystem::path& base_dir = {}) {
  JsonObject root(j, "");
  SettlingCase c;
  c.name = root.string("name");
  c.re_label = root.positive("re_label");
  {
    auto f = root.object("fluid");
    c.fluid_density = f.positive("density");
    c.dynamic_viscosity = f.positive("dynamic_viscosity");
    f.finish();
  }
  {
    auto s = root.object("sphere");
    c.sphere_diameter = s.positive("diameter");
    c.sphere_density = s.positive("density");
    c.release_height = s.positive("release_height");
    s.finish();
  }
  c.container = root.vec3("container");
  if (!(c.container.x > 0 && c.container.y > 0 && c.container.z > 0)) throw ConfigError("container", "must be positive");
  c.gravity = root.positive("gravity", 9.81);
  c.terminal_velocity = root.positive("terminal_velocity");
  if (root.has("full_extents")) {
    const auto e = root.extents("full_extents");
    c.full_extents = {e[0], e[1], e[2]};
  }
  c.tolerance = root.positive("tolerance", 0.05);
  const std::string ref = root.string("reference_csv", "");
  if (!ref.empty()) {
    const std::filesystem::path p(ref);
    c.reference_csv = p.is_absolute() ? p : base_dir / p;
  }
  root.finish();
  c.validate();
  return c;
}

inline SettlingCase load_settling_case(const std::filesystem::path& path) {
  try {
    return parse_settling_case(parse_json_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ":" + e.key_path(), e.what());
  }
}

enum class Scale { full, half, quarter };

inline std::string_view to_string(Scale s) noexcept {
  return s == Scale::full ? "full" : (s == Scale::half ? "half" : "quarter");
}

inline Scale parse_scale(std::string_view s) {
  if (s == "full") return Scale::full;
  if (s == "half") return Scale::half;
  if (s == "quarter") return Scale::quarter;
  throw ArgumentError("unknown scale '" + std::string(s) + "' (expected full, half or quarter)");
}

/// Uniform coarsening of the full grid, rounded up.
inline GridDims scaled_extents(const GridDims& full, Scale s) noexcept {
  const std::size_t f = s == Scale::full ? 1 : (s == Scale::half ? 2 : 4);
  return {(full.nx + f - 1) / f, (full.ny + f - 1) / f, (full.nz + f - 1) / f};
}

struct SettlingOptions {
  Scale scale = Scale::quarter;
  double lattice_velocity = 0.05;  ///< lattice velocity assigned to the terminal velocity
  int supersampling = 3;
  SolidCollision collision = SolidCollision::SC2;
  FractionMode fraction_mode = FractionMode::weighted;
  double stop_gap = 0.1;           ///< stop when the wall gap falls below this many diameters
  double end_time = 0.0;           ///< optional physical end time (0 = run to the wall)
  double hydro_smoothing = 1.0;
  std::size_t workers = 1;
  std::function<void(const Simulation<D3Q19>&, const StepReport&)> observer;
};

struct SettlingSample {
  std::uint64_t step = 0;
  double time = 0.0;
  double height = 0.0;    ///< sphere center above the bottom
  double velocity = 0.0;  ///< settling (downward) velocity
  double hydro_force = 0.0;  ///< vertical hydrodynamic force
};

enum class SettlingStatus { ok, failed };

struct SettlingResult {
  std::string case_name;
  Scale scale = Scale::quarter;
  GridDims extents{};
  double dx = 0.0, dt = 0.0, tau = 0.0, diameter_cells = 0.0;
  std::vector<SettlingSample> samples;
  double max_velocity = 0.0;
  double time_at_max = 0.0;
  bool monotone_rise = false;
  bool single_plateau = false;
  double force_balance_at_max = 0.0;  ///< |F_hydro + F_ext| / |F_ext| at the peak
  std::optional<double> reference_max;
  std::optional<double> relative_error;
  SettlingStatus status = SettlingStatus::ok;
  std::string message;
};

/// Before the maximum every sample is at least its predecessor minus
/// `tolerance` times the maximum.
inline bool monotone_rise(const std::vector<double>& u, double tolerance = 0.01) {
  if (u.empty()) return false;
  std::size_t k = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] > u[k]) k = i;
  const double slack = tolerance * u[k];
  for (std::size_t i = 0; i < k; ++i)
    if (u[i + 1] < u[i] - slack) return false;
  return true;
}

/// Samples within `band` of the maximum form one run. A run ends only when
/// the velocity drops below twice the band, so jitter at the threshold does
/// not open a second plateau.
inline bool single_plateau(const std::vector<double>& u, double band = 0.02) {
  if (u.empty()) return false;
  double m = u[0];
  for (double v : u) m = std::max(m, v);
  const double enter = (1.0 - band) * m, leave = (1.0 - 2.0 * band) * m;
  int runs = 0;
  bool in = false;
  for (double v : u) {
    if (!in && v >= enter) {
      in = true;
      ++runs;
    } else if (in && v < leave) {
      in = false;
    }
  }
  return runs == 1;
}

/// Reads (time, velocity) rows; '#' lines and a non-numeric header are skipped.
inline std::vector<std::pair<double, double>> read_reference_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open reference curve");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream ss(line);
    double t, v;
    if (ss >> t >> v) rows.emplace_back(t, v);
  }
  if (rows.empty()) throw IoError(path.string(), "no (time, velocity) rows");
  return rows;
}

inline Domain settling_domain(const SettlingCase& c, const SettlingOptions& o) {
  Domain d;
  d.extents = scaled_extents(c.full_extents, o.scale);
  d.dx = c.container.x / static_cast<double>(d.extents.nx);
  d.dt = o.lattice_velocity * d.dx / c.terminal_velocity;
  d.nu = c.kinematic_viscosity();
  d.rho_f = c.fluid_density;
  d.gravity = {0.0, 0.0, -c.gravity};
  d.boundaries = BoundarySpec::all(BoundaryType::no_slip);
  return d;
}

/// Runs one settling case with two-way coupling and reports the settling
/// velocity history and curve metrics.
inline SettlingResult run_settling_case(const SettlingCase& c, const SettlingOptions& o = {}) {
  SettlingResult res;
  res.case_name = c.name;
  res.scale = o.scale;
  const Domain dom = settling_domain(c, o);
  res.extents = dom.extents;
  res.dx = dom.dx;
  res.dt = dom.dt;
  res.tau = dom.tau();
  res.diameter_cells = c.sphere_diameter / dom.dx;
  if (res.tau < 0.51) log::warn("settling " + c.name + ": tau = " + std::to_string(res.tau) + " is close to 0.5");

  Simulation<D3Q19> sim(dom, {o.collision, o.fraction_mode}, o.workers);
  const double r = 0.5 * c.sphere_diameter;
  RigidBody sphere;
  sphere.name = "sphere";
  sphere.geometry = std::make_shared<const GeometryField>(voxelize_sphere(r, dom.dx, o.supersampling));
  sphere.initial_pose.translation = {0.5 * dom.dx * static_cast<double>(dom.extents.nx),
                                     0.5 * dom.dx * static_cast<double>(dom.extents.ny), c.release_height};
  sphere.density = c.sphere_density;
  sphere.volume = std::numbers::pi * c.sphere_diameter * c.sphere_diameter * c.sphere_diameter / 6.0;
  sphere.mass = sphere.density * sphere.volume;
  sphere.inertia_body = sphere_inertia(sphere.mass, r);
  sphere.motion = DynamicMotion{o.hydro_smoothing, true};
  sim.add_body(std::move(sphere));

  const double stop_height = r + o.stop_gap * c.sphere_diameter;
  const double fall = c.release_height - stop_height;
  // Generous bound: ten times the fall time at a fifth of the terminal velocity.
  const auto max_steps = static_cast<std::uint64_t>(std::ceil(50.0 * fall / (c.terminal_velocity * dom.dt))) + 100;
  const double f_ext = std::abs((c.sphere_density - c.fluid_density) * sim.bodies()[0].volume * c.gravity);

  std::vector<double> w;
  std::vector<double> balance;
  try {
    while (true) {
      const StepReport& rep = sim.step();
      const RigidBody& b = sim.bodies()[0];
      SettlingSample s{rep.step, static_cast<double>(rep.step) * dom.dt, b.center().z, -b.velocity.z,
                       rep.bodies[0].force.z};
      res.samples.push_back(s);
      w.push_back(s.velocity);
      balance.push_back(std::abs(s.hydro_force - f_ext) / f_ext);
      if (o.observer) o.observer(sim, rep);
      if (s.height <= stop_height) break;
      if (o.end_time > 0.0 && s.time >= o.end_time) break;
      if (rep.step >= max_steps) {
        res.message = "step limit reached before the sphere approached the wall";
        break;
      }
    }
  } catch (const InvalidStateError& e) {
    res.status = SettlingStatus::failed;
    res.message = e.what();
  }

  if (!w.empty()) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
      if (w[i] > w[k]) k = i;
    res.max_velocity = w[k];
    res.time_at_max = res.samples[k].time;
    res.force_balance_at_max = balance[k];
    res.monotone_rise = monotone_rise(w);
    res.single_plateau = single_plateau(w);
  }
  if (!c.reference_csv.empty() && std::filesystem::exists(c.reference_csv)) {
    double m = 0.0;
    for (const auto& [t, v] : read_reference_curve(c.reference_csv)) m = std::max(m, std::abs(v));
    res.reference_max = m;
    res.relative_error = std::abs(res.max_velocity - m) / m;
  }
  return res;
}

/// Relative difference of the max settling velocity between two runs.
inline double max_velocity_difference(const SettlingResult& a, const SettlingResult& b) {
  return std::abs(a.max_velocity - b.max_velocity) / std::max(a.max_velocity, b.max_velocity);
}

}  // namespace psm::validation
