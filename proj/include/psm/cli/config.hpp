#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psm/bodies/rigid_body.hpp"
#include "psm/core/hash.hpp"
#include "psm/core/json_config.hpp"
#include "psm/engine/domain.hpp"
#include "psm/engine/simulation.hpp"

namespace psm::cli {

struct SphereShape { double radius = 0.0; };
struct CubeShape { double side = 0.0; };
struct BoxShape { Vec3 half{}; };
struct DiskShape { double radius = 0.0; };  ///< 2D only
struct BladeShape { double length = 0.0, chord = 0.0, thickness = 0.0, twist = 0.0; };
struct MeshShape { std::filesystem::path path; double scale = 1.0; };

using Shape = std::variant<SphereShape, CubeShape, BoxShape, DiskShape, BladeShape, MeshShape>;

struct BodyConfig {
  std::string name;
  Shape shape;
  int supersampling = 1;
  Vec3 position{};
  Vec3 orientation_axis{0, 0, 1};
  double orientation_angle = 0.0;
  MotionMode motion = PrescribedMotion{};
  double density = 0.0;  ///< required for dynamic bodies
  std::filesystem::path geometry_cache;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  std::size_t interval = 10;      ///< step-series rows every `interval` steps
  bool csv = true;
  bool body_trace = true;
  std::size_t vtk_interval = 0;   ///< 0 disables snapshots
};

struct ScenarioConfig {
  std::string stencil = "D3Q19";
  Domain domain;
  Numerics numerics;
  double initial_density = 1.0;
  Vec3 initial_velocity{};  ///< SI
  std::vector<BodyConfig> bodies;
  OutputConfig output;
  std::size_t workers = 1;
  std::size_t steps = 100;
  bool strict_mesh = true;
  std::string hash = hex64(0);
  std::filesystem::path base_dir;

  [[nodiscard]] int dim() const noexcept { return stencil == "D2Q9" ? 2 : 3; }
};

namespace detail {

inline FaceSpec parse_face(const Json& j, const std::string& path) {
  FaceSpec f;
  if (j.is_string()) {
    try {
      f.type = parse_boundary_type(j.get<std::string>());
    } catch (const ArgumentError& e) {
      throw ConfigError(path, e.what());
    }
    return f;
  }
  JsonObject o(j, path);
  try {
    f.type = parse_boundary_type(o.string("type"));
  } catch (const ArgumentError& e) {
    throw ConfigError(o.key_path("type"), e.what());
  }
  f.velocity = o.vec3("velocity", {});
  f.density = o.positive("density", 1.0);
  o.finish();
  return f;
}

inline BoundarySpec parse_boundaries(JsonObject o) {
  BoundarySpec b;
  if (o.has("all")) {
    const FaceSpec all = parse_face(o.raw("all"), o.key_path("all"));
    for (auto& f : b.faces) f = all;
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const std::string key(BoundarySpec::face_names[i]);
    if (o.has(key)) b.faces[i] = parse_face(o.raw(key), o.key_path(key));
  }
  o.finish();
  return b;
}

inline Shape parse_shape(JsonObject o, const std::filesystem::path& base) {
  if (o.has("mesh")) {
    MeshShape m;
    m.path = o.string("mesh");
    if (m.path.is_relative()) m.path = base / m.path;
    m.scale = o.positive("scale", 1.0);
    o.finish();
    return m;
  }
  const std::string kind = o.string("primitive");
  Shape s;
  if (kind == "sphere") {
    s = SphereShape{o.positive("radius")};
  } else if (kind == "cube") {
    s = CubeShape{o.positive("side")};
  } else if (kind == "box") {
    const Vec3 h = o.vec3("half_extents");
    if (!(h.x > 0 && h.y > 0 && h.z > 0)) throw ConfigError(o.key_path("half_extents"), "must be positive");
    s = BoxShape{h};
  } else if (kind == "disk") {
    s = DiskShape{o.positive("radius")};
  } else if (kind == "blade") {
    s = BladeShape{o.positive("length"), o.positive("chord"), o.positive("thickness"), o.number("twist", 0.0)};
  } else {
    throw ConfigError(o.key_path("primitive"), "unknown primitive '" + kind + "' (sphere, cube, box, disk, blade)");
  }
  o.finish();
  return s;
}

inline BodyConfig parse_body(JsonObject o, const std::filesystem::path& base) {
  BodyConfig b;
  b.name = o.string("name");
  b.shape = parse_shape(o.object("shape"), base);
  b.supersampling = o.integer("supersampling", 1);
  if (b.supersampling < 0 || b.supersampling > 8)
    throw ConfigError(o.key_path("supersampling"), "must be in [0, 8]");
  b.position = o.vec3("position");
  if (o.has("orientation")) {
    auto r = o.object("orientation");
    b.orientation_axis = r.vec3("axis");
    b.orientation_angle = r.number("angle");
    if (norm(b.orientation_axis) == 0.0) throw ConfigError(r.key_path("axis"), "must be non-zero");
    r.finish();
  }
  auto m = o.object("motion");
  const std::string type = m.string("type");
  if (type == "prescribed") {
    PrescribedMotion p;
    p.axis = m.vec3("axis", {0, 0, 1});
    if (norm(p.axis) == 0.0) throw ConfigError(m.key_path("axis"), "must be non-zero");
    p.angular_speed = m.number("angular_speed", 0.0);
    p.velocity = m.vec3("velocity", {});
    b.motion = p;
  } else if (type == "dynamic") {
    DynamicMotion d;
    d.hydro_smoothing = m.number("hydro_smoothing", 1.0);
    if (!(d.hydro_smoothing > 0.0 && d.hydro_smoothing <= 1.0))
      throw ConfigError(m.key_path("hydro_smoothing"), "must be in (0, 1]");
    d.integrate_rotation = m.boolean("rotation", true);
    b.density = m.positive("density");
    b.motion = d;
  } else {
    throw ConfigError(m.key_path("type"), "expected 'prescribed' or 'dynamic'");
  }
  m.finish();
  const std::string cache = o.string("geometry_cache", "");
  if (!cache.empty()) b.geometry_cache = std::filesystem::path(cache).is_relative() ? base / cache : std::filesystem::path(cache);
  o.finish();
  return b;
}

}  // namespace detail

/// Parses and validates a scenario. Nothing is allocated here; every
/// physical check that can fail does so before a simulation is built.
inline ScenarioConfig parse_scenario(const Json& j, const std::filesystem::path& base_dir = {}) {
  ScenarioConfig c;
  c.base_dir = base_dir;
  JsonObject root(j, "");

  if (root.has("numerics")) {
    auto n = root.object("numerics");
    c.stencil = n.string("stencil", "D3Q19");
    if (c.stencil != "D3Q19" && c.stencil != "D2Q9") throw ConfigError(n.key_path("stencil"), "expected D3Q19 or D2Q9");
    try {
      c.numerics.collision = parse_solid_collision(n.string("collision", "SC2"));
    } catch (const ArgumentError& e) {
      throw ConfigError(n.key_path("collision"), e.what());
    }
    try {
      c.numerics.fraction_mode = parse_fraction_mode(n.string("fraction_mode", "weighted"));
    } catch (const ArgumentError& e) {
      throw ConfigError(n.key_path("fraction_mode"), e.what());
    }
    n.finish();
  }

  {
    auto d = root.object("domain");
    const auto e = d.extents("extents");
    c.domain.extents = {e[0], e[1], e[2]};
    c.domain.dx = d.positive("dx");
    c.domain.dt = d.positive("dt");
    c.domain.nu = d.positive("nu");
    c.domain.rho_f = d.positive("rho_f");
    c.domain.gravity = d.vec3("gravity", {});
    if (d.has("boundaries")) c.domain.boundaries = detail::parse_boundaries(d.object("boundaries"));
    d.finish();
    c.domain.validate(c.dim());
  }

  if (root.has("initial")) {
    auto i = root.object("initial");
    c.initial_density = i.positive("density", 1.0);
    c.initial_velocity = i.vec3("velocity", {});
    i.finish();
  }

  if (root.has("bodies")) {
    const Json& arr = root.raw("bodies");
    if (!arr.is_array()) throw ConfigError("bodies", "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k)
      c.bodies.push_back(detail::parse_body(JsonObject(arr[k], "bodies[" + std::to_string(k) + "]"), base_dir));
  }

  if (root.has("output")) {
    auto o = root.object("output");
    c.output.directory = o.string("directory", "out");
    c.output.interval = o.count("interval", 10);
    if (c.output.interval == 0) throw ConfigError(o.key_path("interval"), "must be positive");
    c.output.csv = o.boolean("csv", true);
    c.output.body_trace = o.boolean("body_trace", true);
    c.output.vtk_interval = o.count("vtk_interval", 0);
    o.finish();
  }

  if (root.has("execution")) {
    auto x = root.object("execution");
    c.workers = x.count("workers", 1);
    if (c.workers == 0) throw ConfigError(x.key_path("workers"), "must be positive");
    c.steps = x.count("steps", 100);
    c.strict_mesh = x.boolean("strict_mesh", true);
    x.finish();
  }
  root.finish();
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const auto bytes = [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }();
  Json j;
  try {
    j = parse_json_text(bytes);
  } catch (const ParseError& e) {
    throw ConfigError(path.string(), e.what());
  }
  ScenarioConfig c = parse_scenario(j, path.parent_path());
  c.hash = hex64(fnv1a64(bytes));
  return c;
}

}  // namespace psm::cli
