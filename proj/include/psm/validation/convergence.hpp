#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "psm/bodies/rigid_body.hpp"
#include "psm/engine/simulation.hpp"
#include "psm/geometry/voxelizer.hpp"

namespace psm::validation {

/// Least-squares slope of log(error) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

enum class ProbeStatus { ok, inconclusive };

struct ConvergenceResult {
  std::vector<std::size_t> resolutions;
  std::vector<double> errors;
  double slope = 0.0;  ///< observed order
  ProbeStatus status = ProbeStatus::ok;
};

/// Decaying 2D Taylor-Green vortex on an N x N periodic lattice:
///   u = -U cos(kx) sin(ky),  v = U sin(kx) cos(ky),
///   p = -rho U^2 / 4 (cos 2kx + cos 2ky),  k = 2 pi / N,
/// with velocities decaying as exp(-2 nu k^2 t).
struct TaylorGreen {
  std::size_t N = 64;
  double tau = 0.8;
  double U = 0.02;

  [[nodiscard]] double nu() const noexcept { return (tau - 0.5) / 3.0; }
  [[nodiscard]] double k() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(N); }
  [[nodiscard]] double velocity_decay_rate() const noexcept { return 2.0 * nu() * k() * k(); }

  [[nodiscard]] Vec3 velocity(double x, double y, double t) const noexcept {
    const double a = U * std::exp(-velocity_decay_rate() * t);
    return {-a * std::cos(k() * x) * std::sin(k() * y), a * std::sin(k() * x) * std::cos(k() * y), 0.0};
  }
  [[nodiscard]] double density(double x, double y, double t) const noexcept {
    const double a = U * std::exp(-velocity_decay_rate() * t);
    return 1.0 - 3.0 * a * a / 4.0 * (std::cos(2 * k() * x) + std::cos(2 * k() * y));
  }

  [[nodiscard]] Simulation<D2Q9> make_simulation(std::size_t workers = 1) const {
    Domain d;
    d.extents = {N, N, 1};
    d.nu = nu();
    d.boundaries = BoundarySpec::all(BoundaryType::periodic);
    Simulation<D2Q9> sim(d, {}, workers);
    sim.initialize([&](std::size_t x, std::size_t y, std::size_t) {
      const double cx = static_cast<double>(x) + 0.5, cy = static_cast<double>(y) + 0.5;
      return Moments{density(cx, cy, 0.0), velocity(cx, cy, 0.0)};
    });
    return sim;
  }

  /// Relative L2 velocity error against the analytic field at time t.
  [[nodiscard]] double velocity_error(Simulation<D2Q9>& sim, double t) const {
    double num = 0.0, den = 0.0;
    for (std::size_t y = 0; y < N; ++y)
      for (std::size_t x = 0; x < N; ++x) {
        const Vec3 ref = velocity(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5, t);
        const Vec3 e = sim.moments_at(x, y, 0).u - ref;
        num += dot(e, e);
        den += dot(ref, ref);
      }
    return std::sqrt(num / den);
  }
};

struct DecayRateResult {
  double measured = 0.0;  ///< kinetic-energy decay rate
  double analytic = 0.0;  ///< 4 nu k^2
  double relative_error = 0.0;
};

/// Fits the kinetic-energy decay between steps `t0` and `t1`.
inline DecayRateResult taylor_green_decay_rate(const TaylorGreen& tg, std::size_t t0, std::size_t t1,
                                               std::size_t workers = 1) {
  auto sim = tg.make_simulation(workers);
  sim.run(t0);
  const double e0 = sim.kinetic_energy();
  sim.run(t1 - t0);
  const double e1 = sim.kinetic_energy();
  DecayRateResult r;
  r.measured = std::log(e0 / e1) / static_cast<double>(t1 - t0);
  r.analytic = 2.0 * tg.velocity_decay_rate();
  r.relative_error = std::abs(r.measured - r.analytic) / r.analytic;
  return r;
}

/// Observed order of the velocity error under diffusive scaling: tau is
/// fixed, U ~ 1/N and the run length ~ N^2, so every resolution reaches
/// the same physical time (one velocity e-folding).
inline ConvergenceResult taylor_green_convergence(const std::vector<std::size_t>& Ns, double tau = 0.8,
                                                  double U_coarse = 0.04, std::size_t workers = 1) {
  ConvergenceResult res;
  res.resolutions = Ns;
  std::vector<double> h;
  const double n0 = static_cast<double>(Ns.front());
  for (std::size_t N : Ns) {
    TaylorGreen tg{N, tau, U_coarse * n0 / static_cast<double>(N)};
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / tg.velocity_decay_rate()));
    auto sim = tg.make_simulation(workers);
    sim.run(steps);
    res.errors.push_back(tg.velocity_error(sim, static_cast<double>(steps)));
    h.push_back(1.0 / static_cast<double>(N));
  }
  res.slope = loglog_slope(h, res.errors);
  for (std::size_t i = 1; i < res.errors.size(); ++i)
    if (!(res.errors[i] < res.errors[i - 1])) res.status = ProbeStatus::inconclusive;
  return res;
}

/// Dimensionless drag F_x / (rho nu U) on a static disk of radius 0.15 L
/// at the center of a periodic L x L box, driven by the decaying shear
/// wave u_x = U cos(2 pi y / L), sampled at a fixed diffusive time.
inline double static_disk_drag(std::size_t N, int supersampling = 2, double tau = 0.8, double U_ref = 0.02,
                               std::size_t ref_N = 32, std::size_t workers = 1) {
  Domain d;
  d.extents = {N, N, 1};
  d.nu = (tau - 0.5) / 3.0;
  d.boundaries = BoundarySpec::all(BoundaryType::periodic);
  Simulation<D2Q9> sim(d, {SolidCollision::SC2, FractionMode::weighted}, workers);
  const double L = static_cast<double>(N);
  const double radius = 0.15 * L;
  const double U = U_ref * static_cast<double>(ref_N) / L;
  const Aabb box{{-radius, -radius, -0.5}, {radius, radius, 0.5}};
  RigidBody disk;
  disk.name = "disk";
  disk.geometry = std::make_shared<const GeometryField>(voxelize_predicate(
      box, std::hypot(radius, 0.5), 1.0, supersampling,
      [radius](const Vec3& p) { return p.x * p.x + p.y * p.y < radius * radius; }));
  disk.initial_pose.translation = {0.5 * L, 0.5 * L, 0.5};
  sim.add_body(std::move(disk));
  const double k = 2.0 * std::numbers::pi / L;
  sim.initialize([&](std::size_t, std::size_t y, std::size_t) {
    return Moments{1.0, {U * std::cos(k * (static_cast<double>(y) + 0.5)), 0.0, 0.0}};
  });
  const double scale = L / static_cast<double>(ref_N);
  const auto steps = static_cast<std::size_t>(std::llround(100.0 * scale * scale));
  double fx = 0.0;
  for (std::size_t n = 0; n < steps; ++n) fx = sim.step().bodies[0].force.x;
  return fx / (d.nu * U);
}

/// Self-convergence of the static-disk drag against the finest resolution.
inline ConvergenceResult static_disk_convergence(const std::vector<std::size_t>& Ns, std::size_t finest,
                                                 std::size_t workers = 1) {
  ConvergenceResult res;
  res.resolutions = Ns;
  const double ref = static_disk_drag(finest, 2, 0.8, 0.02, 32, workers);
  std::vector<double> h;
  for (std::size_t N : Ns) {
    res.errors.push_back(std::abs(static_disk_drag(N, 2, 0.8, 0.02, 32, workers) - ref) / std::abs(ref));
    h.push_back(1.0 / static_cast<double>(N));
  }
  res.slope = loglog_slope(h, res.errors);
  for (std::size_t i = 1; i < res.errors.size(); ++i)
    if (!(res.errors[i] < res.errors[i - 1])) res.status = ProbeStatus::inconclusive;
  return res;
}

}  // namespace psm::validation
