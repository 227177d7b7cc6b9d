// Acceptance checks: one line per criterion, nonzero exit if any fails.
//
// Environment:
//   PSM_BUNNY_MESH       watertight bunny surface (STL/OBJ) for criterion 2
//   PSM_SETTLING_FULL=1  also run the full-scale settling comparison
//   PSM_ACCEPT_WORKERS   worker threads for the heavier checks (default 2)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psm/cli/config.hpp"
#include "psm/cli/scenario.hpp"
#include "psm/core/log.hpp"
#include "psm/engine/benchmark.hpp"
#include "psm/engine/boundaries.hpp"
#include "psm/engine/simulation.hpp"
#include "psm/validation/convergence.hpp"
#include "psm/validation/settling.hpp"
#include "psm/validation/volume_suite.hpp"

using namespace psm;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::size_t workers() {
  if (const char* w = std::getenv("PSM_ACCEPT_WORKERS")) return std::max(1, std::atoi(w));
  return 2;
}

Domain lattice_domain(GridDims ext, double tau) {
  Domain d;
  d.extents = ext;
  d.nu = (tau - 0.5) / 3.0;
  d.boundaries = BoundarySpec::all(BoundaryType::periodic);
  return d;
}

template <Stencil S>
PdfField<S> random_state(GridDims d, std::uint64_t seed) {
  PdfField<S> f(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.06, 0.06), r(0.8, 1.2), n(-0.05, 0.05);
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        auto e = equilibrium<S>({u(rng), u(rng), S::D == 3 ? u(rng) : 0.0}, r(rng));
        for (auto& v : e) v *= 1.0 + n(rng);
        f.set_cell(x, y, z, e);
      }
  return f;
}

// 1 ------------------------------------------------------------------------
Outcome cube_volume() {
  WorkerPool pool(workers());
  using validation::VolumeGeometry;
  const auto t = validation::run_volume_table(VolumeGeometry::cube, {10, 20, 40}, {1, 2, 3}, {}, &pool);
  const double e20 = t.at(1, 0).error, e40 = t.at(2, 0).error;
  bool mono = true;
  for (std::size_t is = 0; is < 3; ++is)
    for (std::size_t iN = 1; iN < 3; ++iN)
      if (t.at(iN, is).error > t.at(iN - 1, is).error) mono = false;
  const bool ok = t.at(1, 0).status == validation::CaseStatus::ok && e20 <= 1e-6 && e40 <= 1e-7 && mono;
  return {ok ? Verdict::pass : Verdict::fail, "N=20,s=1 " + fmt("%.2e", e20) + " (<= 1e-6), N=40,s=1 " +
                                                  fmt("%.2e", e40) + " (<= 1e-7), non-increasing in N for s=1..3: " +
                                                  (mono ? "yes" : "no")};
}

// 2 ------------------------------------------------------------------------
Outcome bunny_volume() {
  const char* path = std::getenv("PSM_BUNNY_MESH");
  if (!path || !*path || !fs::exists(path)) return {Verdict::skip, "PSM_BUNNY_MESH not set or file missing"};
  WorkerPool pool(workers());
  validation::VolumeErrorCase c{validation::VolumeGeometry::mesh, 20, 2, 100, path};
  const auto r = validation::run_volume_case(c, &pool);
  if (r.status != validation::CaseStatus::ok) return {Verdict::fail, r.message};
  return {r.error <= 1e-5 ? Verdict::pass : Verdict::fail, "N=20,s=2 " + fmt("%.2e", r.error) + " (<= 1e-5)"};
}

// 3 ------------------------------------------------------------------------
Outcome settling() {
  using namespace validation;
  const fs::path dir = fs::path(PSM_SOURCE_DIR) / "configs" / "settling";
  std::ostringstream detail;
  bool ok = true;
  for (const char* name : {"e1", "e2", "e3", "e4"}) {
    const SettlingCase c = load_settling_case(dir / (std::string(name) + ".json"));
    SettlingOptions q;
    q.scale = Scale::quarter;
    q.workers = workers();
    const auto rq = run_settling_case(c, q);
    const bool shape = rq.status == SettlingStatus::ok && rq.monotone_rise && rq.single_plateau;
    ok = ok && shape;
    detail << c.name << " Re " << fmt("%.1f", c.reynolds()) << ": quarter max " << fmt("%.4f", rq.max_velocity)
           << " m/s, shape " << (shape ? "ok" : "BAD");
    SettlingOptions h = q;
    h.scale = Scale::half;
    h.end_time = rq.time_at_max + 0.1;
    const auto rh = run_settling_case(c, h);
    const double diff = max_velocity_difference(rq, rh);
    ok = ok && rh.status == SettlingStatus::ok && diff <= 0.10;
    detail << ", half max " << fmt("%.4f", rh.max_velocity) << " (" << fmt("%.1f", 100 * diff) << "% <= 10%)";
    if (std::getenv("PSM_SETTLING_FULL") && std::string(std::getenv("PSM_SETTLING_FULL")) == "1") {
      SettlingOptions f = q;
      f.scale = Scale::full;
      const auto rf = run_settling_case(c, f);
      if (rf.relative_error) {
        const bool within = *rf.relative_error <= c.tolerance;
        ok = ok && within;
        detail << ", full vs reference " << fmt("%.1f", 100 * *rf.relative_error) << "% (<= "
               << fmt("%.0f", 100 * c.tolerance) << "%)";
      } else {
        detail << ", full max " << fmt("%.4f", rf.max_velocity) << " (no reference data)";
      }
    }
    detail << "; ";
  }
  return {ok ? Verdict::pass : Verdict::fail, detail.str()};
}

// 4 ------------------------------------------------------------------------
Outcome mass_conservation() {
  double worst = 0.0;
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    Simulation<D3Q19> sim(lattice_domain({32, 32, 32}, 0.8), {v, FractionMode::weighted}, workers());
    RigidBody b;
    b.name = "cube";
    b.geometry = std::make_shared<const GeometryField>(voxelize(make_cube(12.0), 1.0, 1));
    b.initial_pose.translation = {16.2, 15.7, 16.4};
    b.motion = PrescribedMotion{{1, 2, 3}, 2.0 * std::numbers::pi / 1000.0, {}};
    sim.add_body(std::move(b));
    sim.initialize_uniform(1.0, {});
    const double m0 = sim.total_mass();
    sim.run(1000);
    worst = std::max(worst, std::abs(sim.total_mass() - m0) / m0);
  }
  return {worst <= 1e-10 ? Verdict::pass : Verdict::fail,
          "max relative drift over 1000 steps, SC1/SC2/SC3: " + fmt("%.2e", worst) + " (<= 1e-10)"};
}

// 5 ------------------------------------------------------------------------
// Reference: collide per cell with srt_collide, push with periodic wrap.
template <Stencil S>
double zero_solid_difference(GridDims d, std::uint64_t seed, SolidCollision v) {
  auto psm = random_state<S>(d, seed);
  const PdfField<S> start = psm;
  SolidFields solid(d);
  const auto spec = BoundarySpec::all(BoundaryType::periodic);
  const auto links = build_boundary_links<S>(psm.layout(), spec);
  psm_stream_collide<S>(psm, solid, 0.7, v).raise_if_bad(d);
  apply_boundaries<S>(psm, links, spec, {});
  psm.swap();

  double worst = 0.0;
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        const auto c = start.cell(x, y, z);
        const Moments m = macroscopic<S>(c);
        const auto post = srt_collide<S>(c, 0.7, m.rho, m.u);
        for (std::size_t i = 0; i < S::Q; ++i) {
          const std::size_t tx = (x + d.nx + S::c[i][0]) % d.nx, ty = (y + d.ny + S::c[i][1]) % d.ny,
                            tz = (z + d.nz + S::c[i][2]) % d.nz;
          worst = std::max(worst, std::abs(psm.get(i, tx, ty, tz) - post[i]));
        }
      }
  return worst;
}

Outcome zero_solid_equivalence() {
  double worst = 0.0;
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3})
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      worst = std::max(worst, zero_solid_difference<D3Q19>({11, 9, 7}, seed, v));
      worst = std::max(worst, zero_solid_difference<D2Q9>({13, 10, 1}, seed, v));
    }
  return {worst <= 1e-14 ? Verdict::pass : Verdict::fail,
          "max |PSM(B=0) - scalar LBM| over D2Q9/D3Q19, SC1/SC2/SC3, 3 random states: " + fmt("%.1e", worst) +
              " (<= 1e-14)"};
}

// 6 ------------------------------------------------------------------------
Outcome reduction_oracle() {
  using S = D3Q19;
  const GridDims d{32, 32, 32};
  const double tau = 0.85;
  const Vec3 R{15.3, 16.1, 16.7};
  double worst = 0.0;
  WorkerPool pool(std::max<std::size_t>(4, workers()));
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    auto f = random_state<S>(d, 42 + static_cast<std::uint64_t>(v));
    const PdfField<S> start = f;
    SolidFields solid(d);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.05, 0.05), b(0.0, 1.0);
    for (std::size_t k = 0; k < d.cells(); ++k) {
      if (b(rng) < 0.3) continue;
      solid.B[k] = b(rng);
      solid.u_s[k] = {u(rng), u(rng), u(rng)};
      solid.body[k] = 0;
    }
    psm_stream_collide<S>(f, solid, tau, v, &pool).raise_if_bad(d);
    std::vector<CoveredContribution> cells;
    for (std::size_t k = 0; k < d.cells(); ++k) {
      if (solid.B[k] == 0.0) continue;
      const auto c = d.coords(k);
      cells.push_back({k, solid.B[k], solid.solid_momentum[k], {c[0] + 0.5, c[1] + 0.5, c[2] + 0.5}});
    }
    const Vec3 F = reduce_force(cells, 1.0, 1.0, &pool);
    const Vec3 T = reduce_torque(cells, R, 1.0, 1.0, &pool);

    Vec3 Fn{}, Tn{};
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const std::size_t k = d.index(x, y, z);
          if (solid.B[k] == 0.0) continue;
          const auto c = start.cell(x, y, z);
          const Moments m = macroscopic<S>(c);
          const auto os = solid_collision<S>(v, c, m.rho, m.u, solid.u_s[k], tau);
          Vec3 mom{};
          for (std::size_t i = 0; i < S::Q; ++i) mom += Vec3{1.0 * S::c[i][0], 1.0 * S::c[i][1], 1.0 * S::c[i][2]} * os[i];
          Fn += mom * solid.B[k];
          Tn += cross(Vec3{x + 0.5, y + 0.5, z + 0.5} - R, mom) * solid.B[k];
        }
    worst = std::max({worst, norm(F - Fn) / norm(Fn), norm(T - Tn) / norm(Tn)});
  }
  return {worst <= 1e-12 ? Verdict::pass : Verdict::fail,
          "max relative |parallel - naive| for F and T, SC1/SC2/SC3 on 32^3: " + fmt("%.1e", worst) + " (<= 1e-12)"};
}

// 7 ------------------------------------------------------------------------
Outcome rest_fixed_point() {
  double worst = 0.0;
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    Simulation<D3Q19> sim(lattice_domain({24, 24, 24}, 0.9), {v, FractionMode::weighted}, workers());
    RigidBody cube;
    cube.name = "cube";
    cube.geometry = std::make_shared<const GeometryField>(voxelize(make_cube(7.0), 1.0, 2));
    cube.initial_pose.translation = {8.3, 12.1, 11.6};
    cube.initial_pose.rotation = rotation_about({1, 1, 1}, 0.5);
    RigidBody ball;
    ball.name = "sphere";
    ball.geometry = std::make_shared<const GeometryField>(voxelize_sphere(4.2, 1.0, 2));
    ball.initial_pose.translation = {17.4, 11.8, 12.3};
    sim.add_body(std::move(cube));
    sim.add_body(std::move(ball));
    sim.initialize_uniform(1.0, {});
    sim.run(1000);
    const auto w = equilibrium<D3Q19>({}, 1.0);
    for (std::size_t z = 0; z < 24; ++z)
      for (std::size_t y = 0; y < 24; ++y)
        for (std::size_t x = 0; x < 24; ++x) {
          const auto c = sim.pdfs().cell(x, y, z);
          for (std::size_t i = 0; i < 19; ++i) worst = std::max(worst, std::abs(c[i] - w[i]));
        }
  }
  return {worst <= 1e-13 ? Verdict::pass : Verdict::fail,
          "max per-cell |f - w_i| after 1000 steps with two static bodies, SC1/SC2/SC3: " + fmt("%.1e", worst) +
              " (<= 1e-13)"};
}

// 8 ------------------------------------------------------------------------
Outcome pure_fluid_accuracy() {
  const validation::TaylorGreen tg{64, 0.8, 0.02};
  const auto steps = static_cast<std::size_t>(std::llround(0.5 / tg.velocity_decay_rate()));
  const auto rate = validation::taylor_green_decay_rate(tg, 0, steps, workers());
  const auto conv = validation::taylor_green_convergence({16, 32, 64}, 0.8, 0.04, workers());
  const bool ok = rate.relative_error <= 0.05 && std::abs(conv.slope - 2.0) <= 0.3;
  return {ok ? Verdict::pass : Verdict::fail,
          "decay rate error at 64^2 " + fmt("%.2f", 100 * rate.relative_error) + "% (<= 5%), order " +
              fmt("%.2f", conv.slope) + " over 16/32/64 (2 +- 0.3)"};
}

// 9 ------------------------------------------------------------------------
Outcome performance() {
  BenchmarkConfig c;
  c.extents = {64, 64, 64};
  c.steps = 20;
  c.repeats = 5;
  c.workers = 1;
  const BenchmarkReport r = measure_mlups(c);
  const double lbm = r.find("lbm")->mlups, st = r.find("psm_static")->mlups;
  const auto *s0 = r.find("psm_rotating_s0"), *s1 = r.find("psm_rotating_s1");
  const double ratio = st / lbm;
  const double share = std::max(s0->rebuild_share, s1->rebuild_share);
  const double ds = std::abs(s1->mlups - s0->mlups) / s0->mlups;
  const bool ok = ratio >= 0.85 && share <= 0.15 && ds <= 0.05;
  std::ostringstream os;
  os << "static/lbm " << fmt("%.3f", ratio) << " (>= 0.85), rotation share " << fmt("%.1f", 100 * share)
     << "% (<= 15%), s0 vs s1 " << fmt("%.1f", 100 * ds) << "% (<= 5%); reported: lbm " << fmt("%.2f", lbm)
     << " MLUPS, roofline " << fmt("%.1f", r.roofline_mlups) << " MLUPS at " << fmt("%.0f", r.bandwidth_mb_s)
     << " MB/s";
  return {ok ? Verdict::pass : Verdict::fail, os.str()};
}

// 10 -----------------------------------------------------------------------
std::vector<std::vector<double>> numeric_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path cfg = fs::path(PSM_SOURCE_DIR) / "configs" / "rotating_cube.json";
  const fs::path root = fs::temp_directory_path() / "psm_acceptance";
  fs::remove_all(root);
  cli::ScenarioConfig c = cli::load_scenario(cfg);
  c.steps = 100;
  c.output.interval = 1;
  c.workers = 2;
  (void)cli::run_scenario(c, root / "a");
  (void)cli::run_scenario(c, root / "b");
  c.workers = 1;
  (void)cli::run_scenario(c, root / "w1");
  c.workers = 4;
  (void)cli::run_scenario(c, root / "w4");
  bool identical = true;
  double worst = 0.0;
  for (const char* f : {"steps.csv", "body_cube.csv"}) {
    const std::string a = slurp(root / "a" / f);
    identical = identical && !a.empty() && a == slurp(root / "b" / f);
    const auto r1 = numeric_rows(root / "w1" / f), r4 = numeric_rows(root / "w4" / f);
    if (r1.size() != r4.size() || r1.empty()) return {Verdict::fail, std::string("row count differs in ") + f};
    for (std::size_t i = 0; i < r1.size(); ++i)
      for (std::size_t j = 0; j < r1[i].size(); ++j)
        worst = std::max(worst, std::abs(r1[i][j] - r4[i][j]) / std::max(1e-300, std::abs(r1[i][j]) + std::abs(r4[i][j])));
  }
  const bool ok = identical && worst <= 1e-12;
  return {ok ? Verdict::pass : Verdict::fail, std::string("repeat run byte-identical: ") + (identical ? "yes" : "no") +
                                                  ", max relative difference 1 vs 4 workers " + fmt("%.1e", worst) +
                                                  " (<= 1e-12)"};
}

}  // namespace

int main() {
  log::set_level(log::Level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"cube volume error", cube_volume},
      {"bunny volume error", bunny_volume},
      {"settling sphere", settling},
      {"mass conservation", mass_conservation},
      {"plain-LBM reduction", zero_solid_equivalence},
      {"force/torque oracle", reduction_oracle},
      {"rest fixed point", rest_fixed_point},
      {"pure-fluid accuracy", pure_fluid_accuracy},
      {"performance ratios", performance},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[k].second();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.verdict == Verdict::pass ? "PASS" : (o.verdict == Verdict::skip ? "SKIP" : "FAIL");
    if (o.verdict == Verdict::fail) ++failures;
    std::printf("criterion %2zu %s  %s: %s [%.1fs]\n", k + 1, tag, checks[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
