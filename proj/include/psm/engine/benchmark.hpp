#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstring>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "psm/bodies/rigid_body.hpp"
#include "psm/engine/simulation.hpp"
#include "psm/geometry/mesh.hpp"
#include "psm/geometry/voxelizer.hpp"
#include "psm/lattice/stencil.hpp"

namespace psm {

/// Node-level throughput setup: a D3Q19 periodic box with a twisted-blade
/// rotor occupying a small region of the domain.
struct BenchmarkConfig {
  GridDims extents{96, 96, 96};
  std::size_t steps = 20;
  std::size_t warmup = 3;
  std::size_t repeats = 3;
  std::size_t workers = 1;
  double rotor_span = 0.4;          ///< fraction of nx
  Vec3 rotor_center{0.3, 0.3, 0.5}; ///< fraction of the extents
  double revolutions_per_1000_steps = 1.0;
  std::size_t copy_bytes = std::size_t{1} << 27;
};

struct VariantResult {
  std::string name;
  double mlups = 0.0;          ///< best over repeats
  double rebuild_share = 0.0;  ///< pose + rebuild time over timed step time
};

struct BenchmarkReport {
  std::vector<VariantResult> variants;
  double bandwidth_mb_s = 0.0;
  double roofline_mlups = 0.0;
  std::size_t q = 19;

  [[nodiscard]] const VariantResult* find(const std::string& name) const {
    for (const auto& v : variants)
      if (v.name == name) return &v;
    return nullptr;
  }

  /// Machine-parsable key=value lines.
  void write(std::ostream& os) const {
    os << "q=" << q << '\n';
    os << "bandwidth_mb_s=" << bandwidth_mb_s << '\n';
    os << "roofline_mlups=" << roofline_mlups << '\n';
    for (const auto& v : variants) {
      os << "mlups." << v.name << '=' << v.mlups << '\n';
      os << "rebuild_share." << v.name << '=' << v.rebuild_share << '\n';
    }
    const auto* plain = find("lbm");
    const auto* stat = find("psm_static");
    const auto* r0 = find("psm_rotating_s0");
    const auto* r1 = find("psm_rotating_s1");
    if (plain && stat && plain->mlups > 0) os << "ratio.psm_static_over_lbm=" << stat->mlups / plain->mlups << '\n';
    if (r0 && r1 && r0->mlups > 0) os << "ratio.rotating_s1_over_s0=" << r1->mlups / r0->mlups << '\n';
  }
};

/// P_max = BW / (2 q 8 bytes), with BW in MB/s and the result in MLUPS.
constexpr double roofline_mlups(double bandwidth_mb_s, std::size_t q) noexcept {
  return bandwidth_mb_s / (2.0 * static_cast<double>(q) * 8.0);
}

/// Stream-like copy bandwidth in MB/s (read + write bytes), best of runs.
inline double measure_copy_bandwidth(std::size_t bytes, std::size_t runs = 5) {
  const std::size_t n = std::max<std::size_t>(1, bytes / sizeof(double));
  std::vector<double> a(n, 1.0), b(n, 0.0);
  double best = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    std::memcpy(b.data(), a.data(), n * sizeof(double));
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    if (s > 0) best = std::max(best, 2.0 * static_cast<double>(n * sizeof(double)) / s / 1e6);
    a[r % n] = b[(r + 1) % n];
  }
  return best;
}

namespace detail {

inline RigidBody benchmark_rotor(const BenchmarkConfig& cfg, int s, bool rotating) {
  const double n = static_cast<double>(cfg.extents.nx);
  const double span = cfg.rotor_span * n;
  const TriangleMesh blade = make_twisted_blade(span, 0.3 * span, 0.1 * span, std::numbers::pi / 3.0, 16);
  RigidBody b;
  b.name = "rotor";
  b.geometry = std::make_shared<const GeometryField>(voxelize(blade, 1.0, s));
  b.initial_pose.translation = {cfg.rotor_center.x * n, cfg.rotor_center.y * static_cast<double>(cfg.extents.ny),
                                cfg.rotor_center.z * static_cast<double>(cfg.extents.nz)};
  PrescribedMotion m;
  m.axis = {1, 0, 0};
  m.angular_speed = rotating ? 2.0 * std::numbers::pi * cfg.revolutions_per_1000_steps / 1000.0 : 0.0;
  b.motion = m;
  return b;
}

}  // namespace detail

/// MLUPS of the fused kernel plus geometry handling (pose, rebuild,
/// reductions) for plain LBM, PSM with a static body and PSM with a
/// rotating body at s = 0 and s = 1. Boundary handling is not timed.
inline BenchmarkReport measure_mlups(const BenchmarkConfig& cfg) {
  if (cfg.steps == 0) throw ArgumentError("benchmark needs steps > 0");
  BenchmarkReport rep;
  rep.q = D3Q19::Q;
  Domain dom;
  dom.extents = cfg.extents;
  dom.dx = 1.0;
  dom.dt = 1.0;
  dom.nu = 0.05;
  dom.rho_f = 1.0;
  dom.boundaries = BoundarySpec::all(BoundaryType::periodic);

  struct Variant {
    const char* name;
    bool body;
    bool rotating;
    int s;
  };
  const Variant variants[] = {{"lbm", false, false, 0},
                              {"psm_static", true, false, 1},
                              {"psm_rotating_s0", true, true, 0},
                              {"psm_rotating_s1", true, true, 1}};
  const double cells = static_cast<double>(cfg.extents.cells());
  for (const auto& v : variants) {
    Simulation<D3Q19> sim(dom, {SolidCollision::SC1, FractionMode::weighted}, cfg.workers);
    if (v.body) sim.add_body(detail::benchmark_rotor(cfg, v.s, v.rotating));
    sim.initialize_uniform(1.0, {0.02, 0.0, 0.0});
    VariantResult res{v.name, 0.0, 0.0};
    for (std::size_t r = 0; r < std::max<std::size_t>(1, cfg.repeats); ++r) {
      for (std::size_t k = 0; k < cfg.warmup; ++k) sim.step();
      double ns = 0.0, geo_ns = 0.0;
      for (std::size_t k = 0; k < cfg.steps; ++k) {
        const StepReport& sr = sim.step();
        const auto& p = sr.phase_ns;
        const double geo = static_cast<double>(p[static_cast<std::size_t>(Phase::pose)] +
                                               p[static_cast<std::size_t>(Phase::rebuild)]);
        ns += geo + static_cast<double>(p[static_cast<std::size_t>(Phase::kernel)] +
                                        p[static_cast<std::size_t>(Phase::reduce)]);
        geo_ns += geo;
      }
      const double mlups = ns > 0 ? cells * static_cast<double>(cfg.steps) / (ns * 1e-9) / 1e6 : 0.0;
      if (mlups > res.mlups) {
        res.mlups = mlups;
        res.rebuild_share = ns > 0 ? geo_ns / ns : 0.0;
      }
    }
    rep.variants.push_back(res);
  }
  rep.bandwidth_mb_s = measure_copy_bandwidth(cfg.copy_bytes);
  rep.roofline_mlups = roofline_mlups(rep.bandwidth_mb_s, rep.q);
  return rep;
}

}  // namespace psm
