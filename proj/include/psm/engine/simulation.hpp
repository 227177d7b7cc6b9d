#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "psm/bodies/rigid_body.hpp"
#include "psm/core/error.hpp"
#include "psm/core/vec.hpp"
#include "psm/core/worker_pool.hpp"
#include "psm/engine/boundaries.hpp"
#include "psm/engine/domain.hpp"
#include "psm/engine/units.hpp"
#include "psm/geometry/fraction.hpp"
#include "psm/lattice/collision.hpp"
#include "psm/lattice/pdf_field.hpp"
#include "psm/lattice/psm_kernel.hpp"
#include "psm/lattice/reduction.hpp"

namespace psm {

struct Numerics {
  SolidCollision collision = SolidCollision::SC2;
  FractionMode fraction_mode = FractionMode::weighted;
};

enum class Phase : std::size_t { pose, rebuild, kernel, reduce, integrate, boundary, count };

inline constexpr std::array<std::string_view, static_cast<std::size_t>(Phase::count)> kPhaseNames{
    "pose", "rebuild", "kernel", "reduce", "integrate", "boundary"};

struct BodyLoad {
  Vec3 force{};   ///< hydrodynamic force on the body, N
  Vec3 torque{};  ///< hydrodynamic torque about the center, N m
};

struct StepReport {
  std::uint64_t step = 0;  ///< number of completed steps
  double mass = 0.0;       ///< total lattice mass (only with diagnostics)
  double max_u = 0.0;      ///< max |u| in lattice units (only with diagnostics)
  bool has_diagnostics = false;
  std::vector<BodyLoad> bodies;
  std::array<std::int64_t, static_cast<std::size_t>(Phase::count)> phase_ns{};
};

/// Coupled fluid/rigid-body solver on a uniform grid.
///
/// One step runs, in order: prescribed pose update, fraction and solid
/// velocity rebuild for bodies whose coverage can change, fused PSM
/// stream-collide, force/torque reductions, dynamic body integration,
/// boundary links, buffer swap.
template <Stencil S>
class Simulation {
 public:
  Simulation(Domain domain, Numerics numerics = {}, std::size_t workers = 1)
      : domain_(std::move(domain)),
        numerics_(numerics),
        units_(domain_.units()),
        relax_((domain_.validate(S::D), domain_.tau(S::cs2))),
        pdfs_(domain_.extents),
        solid_(domain_.extents),
        pool_(std::make_unique<WorkerPool>(workers)),
        links_(build_boundary_links<S>(pdfs_.layout(), domain_.boundaries)) {
    for (std::size_t f = 0; f < 6; ++f) wall_u_[f] = units_.velocity_to_lattice(domain_.boundaries.faces[f].velocity);
    initialize_uniform(1.0, {});
  }

  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] const Numerics& numerics() const noexcept { return numerics_; }
  [[nodiscard]] const UnitConverter& units() const noexcept { return units_; }
  [[nodiscard]] double tau() const noexcept { return relax_.tau(); }
  [[nodiscard]] std::uint64_t steps_done() const noexcept { return step_; }
  [[nodiscard]] std::size_t workers() const noexcept { return pool_->size(); }
  [[nodiscard]] const PdfField<S>& pdfs() const noexcept { return pdfs_; }
  [[nodiscard]] PdfField<S>& pdfs() noexcept { return pdfs_; }
  [[nodiscard]] const SolidFields& solid() const noexcept { return solid_; }
  [[nodiscard]] const std::vector<RigidBody>& bodies() const noexcept { return bodies_; }
  [[nodiscard]] std::vector<RigidBody>& bodies() noexcept { return bodies_; }
  [[nodiscard]] const StepReport& last_report() const noexcept { return report_; }
  [[nodiscard]] WorkerPool& pool() noexcept { return *pool_; }

  /// Adds a body; returns its id. The geometry spacing must match dx.
  std::size_t add_body(RigidBody body) {
    if (!body.geometry) throw ArgumentError("body '" + body.name + "' has no geometry field");
    if (std::abs(body.geometry->dx_lbm() - domain_.dx) > 1e-12 * domain_.dx)
      throw ArgumentError("body '" + body.name + "' geometry spacing does not match the lattice spacing");
    if (body.is_dynamic() && !(body.mass > 0.0)) throw ArgumentError("dynamic body '" + body.name + "' needs mass > 0");
    body.pose = body.initial_pose;
    bodies_.push_back(std::move(body));
    overlaps_.emplace_back();
    built_.push_back(false);
    return bodies_.size() - 1;
  }

  /// Equilibrium initialization at lattice density/velocity.
  void initialize_uniform(double rho, const Vec3& u_lattice) {
    initialize([&](std::size_t, std::size_t, std::size_t) { return Moments{rho, u_lattice}; });
  }

  /// Equilibrium initialization from per-cell lattice moments.
  void initialize(const std::function<Moments(std::size_t, std::size_t, std::size_t)>& fn) {
    const auto& d = domain_.extents;
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const Moments m = fn(x, y, z);
          pdfs_.set_cell(x, y, z, equilibrium<S>(m.u, m.rho));
        }
  }

  /// Advances one time step. Diagnostics (mass, max |u|) cost a full sweep
  /// and are computed only on request.
  const StepReport& step(bool diagnostics = false) {
    using clock = std::chrono::steady_clock;
    StepReport rep;
    auto tick = clock::now();
    auto lap = [&](Phase p) {
      const auto now = clock::now();
      rep.phase_ns[static_cast<std::size_t>(p)] =
          std::chrono::duration_cast<std::chrono::nanoseconds>(now - tick).count();
      tick = now;
    };

    for (auto& b : bodies_)
      if (!b.is_dynamic()) advance_prescribed(b, step_, domain_.dt);
    lap(Phase::pose);

    rebuild_solid();
    lap(Phase::rebuild);

    const KernelStatus st = bodies_.empty() ? lbm_stream_collide<S>(pdfs_, relax_.tau(), pool_.get())
                                            : psm_stream_collide<S>(pdfs_, solid_, relax_.tau(), numerics_.collision, pool_.get());
    st.raise_if_bad(domain_.extents, static_cast<std::int64_t>(step_));
    lap(Phase::kernel);

    rep.bodies = body_loads();
    lap(Phase::reduce);

    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      RigidBody& body = bodies_[b];
      if (!body.is_dynamic()) continue;
      BodyForces forces{rep.bodies[b].force, rep.bodies[b].torque,
                        gravity_and_buoyancy(body, domain_.rho_f, domain_.gravity)};
      integrate_dynamic(body, forces, domain_.dt);
      const Vec3& R = body.center();
      if (!std::isfinite(R.x) || !std::isfinite(R.y) || !std::isfinite(R.z) || !std::isfinite(body.velocity.x) ||
          !std::isfinite(body.velocity.y) || !std::isfinite(body.velocity.z))
        throw InvalidStateError("non-finite state of body '" + body.name + "'", -1, -1, -1,
                                static_cast<std::int64_t>(step_));
    }
    lap(Phase::integrate);

    apply_boundaries<S>(pdfs_, links_, domain_.boundaries, wall_u_);
    pdfs_.swap();
    ++step_;
    lap(Phase::boundary);

    rep.step = step_;
    if (diagnostics) {
      rep.mass = total_mass();
      rep.max_u = max_velocity();
      rep.has_diagnostics = true;
    }
    report_ = std::move(rep);
    return report_;
  }

  /// Runs `n` steps; `observer` sees every report.
  void run(std::size_t n, const std::function<void(const StepReport&)>& observer = {}, bool diagnostics = false) {
    for (std::size_t k = 0; k < n; ++k) {
      const StepReport& r = step(diagnostics);
      if (observer) observer(r);
    }
  }

  [[nodiscard]] Moments moments_at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return moments_unchecked<S>(pdfs_.cell(x, y, z));
  }

  /// Total lattice mass; row sums added in fixed order.
  [[nodiscard]] double total_mass() {
    return row_reduce([&](std::size_t p, const double* src, std::size_t stride) {
      double rho = 0.0;
      for (std::size_t i = 0; i < S::Q; ++i) rho += src[i * stride + p];
      return rho;
    }, false);
  }

  [[nodiscard]] double max_velocity() {
    return row_reduce([&](std::size_t p, const double* src, std::size_t stride) {
      Pdfs<S> f{};
      for (std::size_t i = 0; i < S::Q; ++i) f[i] = src[i * stride + p];
      return norm(moments_unchecked<S>(f).u);
    }, true);
  }

  /// Kinetic energy sum 0.5 rho |u|^2 over all cells (lattice units).
  [[nodiscard]] double kinetic_energy() {
    return row_reduce([&](std::size_t p, const double* src, std::size_t stride) {
      Pdfs<S> f{};
      for (std::size_t i = 0; i < S::Q; ++i) f[i] = src[i * stride + p];
      const Moments m = moments_unchecked<S>(f);
      return 0.5 * m.rho * dot(m.u, m.u);
    }, false);
  }

  /// Cells currently covered by body `b` (ascending index, with eps).
  [[nodiscard]] const std::vector<OverlapSample>& coverage(std::size_t b) const { return overlaps_.at(b); }

 private:
  [[nodiscard]] static bool is_static(const RigidBody& b) noexcept {
    if (b.is_dynamic()) return false;
    const auto& m = std::get<PrescribedMotion>(b.motion);
    return m.angular_speed == 0.0 && m.velocity == Vec3{};
  }

  /// Zeroes last step's coverage, recomputes overlaps of moving bodies and
  /// merges all bodies: each cell takes the largest eps (lowest id on ties)
  /// and that body's solid velocity.
  void rebuild_solid() {
    if (bodies_.empty()) return;
    bool changed = false;
    for (std::size_t b = 0; b < bodies_.size(); ++b)
      if (!built_[b] || !is_static(bodies_[b])) {
        changed = true;
        break;
      }
    if (!changed) return;

    for (std::size_t c : covered_) solid_.clear_cell(c);
    covered_.clear();

    const GridGeometry grid = domain_.grid();
    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      if (built_[b] && is_static(bodies_[b])) continue;
      overlaps_[b] = compute_overlap(*bodies_[b].geometry, bodies_[b].pose, grid, pool_.get());
      built_[b] = true;
    }

    eps_scratch_.resize(domain_.extents.cells(), 0.0);
    for (std::size_t b = 0; b < bodies_.size(); ++b)
      for (const auto& o : overlaps_[b]) {
        const auto c = o.cell;
        if (solid_.body[c] == kNoBody) {
          covered_.push_back(c);
        } else if (o.eps <= eps_scratch_[c]) {
          continue;
        }
        eps_scratch_[c] = o.eps;
        solid_.body[c] = static_cast<std::int32_t>(b);
      }
    std::sort(covered_.begin(), covered_.end());

    const auto& d = domain_.extents;
    for (std::size_t c : covered_) {
      const RigidBody& body = bodies_[static_cast<std::size_t>(solid_.body[c])];
      const auto xyz = d.coords(c);
      const Vec3 center = grid.cell_center(xyz[0], xyz[1], xyz[2]);
      solid_.B[c] = weight_fraction(eps_scratch_[c], relax_.tau(), numerics_.fraction_mode);
      solid_.u_s[c] = units_.velocity_to_lattice(solid_velocity_at(body, center));
      solid_.solid_momentum[c] = {};
      eps_scratch_[c] = 0.0;
    }
  }

  /// Hydrodynamic loads in SI; the body receives the negative of the
  /// momentum the solid term hands to the fluid.
  std::vector<BodyLoad> body_loads() {
    std::vector<BodyLoad> loads(bodies_.size());
    if (bodies_.empty()) return loads;
    const auto& d = domain_.extents;
    std::vector<std::vector<CoveredContribution>> per(bodies_.size());
    for (std::size_t c : covered_) {
      const auto b = static_cast<std::size_t>(solid_.body[c]);
      const auto xyz = d.coords(c);
      per[b].push_back({c, solid_.B[c], solid_.solid_momentum[c],
                        Vec3{static_cast<double>(xyz[0]) + 0.5, static_cast<double>(xyz[1]) + 0.5,
                             static_cast<double>(xyz[2]) + 0.5}});
    }
    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      const Vec3 R = units_.position_to_lattice(bodies_[b].center() - domain_.grid().origin);
      const Vec3 f = reduce_force(per[b], 1.0, 1.0, pool_.get());
      const Vec3 t = reduce_torque(per[b], R, 1.0, 1.0, pool_.get());
      loads[b].force = units_.force_to_si(f) * -1.0;
      loads[b].torque = units_.torque_to_si(t) * -1.0;
    }
    return loads;
  }

  /// Per-row partial results combined serially in row order.
  template <typename CellFn>
  double row_reduce(CellFn&& fn, bool take_max) {
    const auto& d = domain_.extents;
    const auto& L = pdfs_.layout();
    const double* src = pdfs_.src().data();
    const std::size_t stride = pdfs_.stride();
    const std::size_t rows = d.ny * d.nz;
    std::vector<double> partial(rows, 0.0);
    pool_->parallel_for(rows, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        std::size_t p = L.index(0, r % d.ny, r / d.ny);
        double acc = 0.0;
        for (std::size_t x = 0; x < d.nx; ++x, ++p) {
          const double v = fn(p, src, stride);
          acc = take_max ? std::max(acc, v) : acc + v;
        }
        partial[r] = acc;
      }
    });
    double total = 0.0;
    for (double v : partial) total = take_max ? std::max(total, v) : total + v;
    return total;
  }

  Domain domain_;
  Numerics numerics_;
  UnitConverter units_;
  RelaxationParams relax_;
  PdfField<S> pdfs_;
  SolidFields solid_;
  std::unique_ptr<WorkerPool> pool_;
  std::vector<BoundaryLink> links_;
  std::array<Vec3, 6> wall_u_{};
  std::vector<RigidBody> bodies_;
  std::vector<std::vector<OverlapSample>> overlaps_;
  std::vector<bool> built_;
  std::vector<std::size_t> covered_;
  std::vector<double> eps_scratch_;
  std::uint64_t step_ = 0;
  StepReport report_;
};

}  // namespace psm
