#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psm/lattice/collision.hpp"
#include "psm/lattice/psm_kernel.hpp"
#include "psm/lattice/reduction.hpp"
#include "psm/lattice/stencil.hpp"

using namespace psm;

namespace {

template <Stencil S>
void check_stencil() {
  double w = 0.0;
  double m2[3][3] = {};
  for (std::size_t i = 0; i < S::Q; ++i) {
    w += S::w[i];
    const std::size_t o = S::opposite[i];
    for (int a = 0; a < 3; ++a) EXPECT_EQ(S::c[o][a], -S::c[i][a]);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m2[a][b] += S::w[i] * S::c[i][a] * S::c[i][b];
  }
  EXPECT_NEAR(w, 1.0, 1e-15);
  for (int a = 0; a < S::D; ++a)
    for (int b = 0; b < S::D; ++b) EXPECT_NEAR(m2[a][b], a == b ? S::cs2 : 0.0, 1e-15);
}

template <Stencil S>
PdfField<S> random_field(GridDims d, std::uint32_t seed) {
  PdfField<S> f(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05), r(0.9, 1.1), n(-1e-3, 1e-3);
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        auto e = equilibrium<S>({u(rng), u(rng), S::D == 3 ? u(rng) : 0.0}, r(rng));
        for (auto& v : e) v += n(rng) * v;
        f.set_cell(x, y, z, e);
      }
  return f;
}

}  // namespace

TEST(Stencil, D2Q9Moments) { check_stencil<D2Q9>(); }
TEST(Stencil, D3Q19Moments) { check_stencil<D3Q19>(); }

TEST(Equilibrium, RecoversMoments) {
  const Vec3 u{0.03, -0.02, 0.01};
  const auto f = equilibrium<D3Q19>(u, 1.07);
  const Moments m = macroscopic<D3Q19>(f);
  EXPECT_NEAR(m.rho, 1.07, 1e-14);
  EXPECT_NEAR(m.u.x, u.x, 1e-14);
  EXPECT_NEAR(m.u.y, u.y, 1e-14);
  EXPECT_NEAR(m.u.z, u.z, 1e-14);
}

TEST(Equilibrium, RestStateIsWeights) {
  const auto f = equilibrium<D3Q19>({}, 1.0);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_DOUBLE_EQ(f[i], D3Q19::w[i]);
  const Moments m = macroscopic<D3Q19>(f);
  EXPECT_DOUBLE_EQ(m.rho, 1.0);
  EXPECT_EQ(norm(m.u), 0.0);
}

TEST(Equilibrium, MomentumBySummation) {
  const auto f = equilibrium<D3Q19>({0.05, 0.0, 0.0}, 1.0);
  double m[3] = {};
  for (std::size_t i = 0; i < 19; ++i)
    for (int a = 0; a < 3; ++a) m[a] += f[i] * D3Q19::c[i][a];
  EXPECT_NEAR(m[0], 0.05, 1e-16);
  EXPECT_NEAR(m[1], 0.0, 1e-17);
  EXPECT_NEAR(m[2], 0.0, 1e-17);
}

TEST(Macroscopic, MatchesScalarLoop) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0.01, 0.2);
  for (int trial = 0; trial < 50; ++trial) {
    Pdfs<D3Q19> f{};
    for (auto& v : f) v = r(rng);
    double rho = 0.0, j[3] = {};
    for (std::size_t i = 0; i < 19; ++i) {
      rho += f[i];
      for (int a = 0; a < 3; ++a) j[a] += f[i] * D3Q19::c[i][a];
    }
    const Moments m = macroscopic<D3Q19>(f);
    EXPECT_NEAR(m.rho, rho, 1e-15);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(m.u[a], j[a] / rho, 1e-15);
  }
}

TEST(Srt, EquilibriumIsFixedPointAndUnitTauRelaxesFully) {
  const Vec3 u{0.01, 0.03, -0.02};
  const auto feq = equilibrium<D3Q19>(u, 1.03);
  const auto same = srt_collide<D3Q19>(feq, 0.7, 1.03, u);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_NEAR(same[i], feq[i], 1e-16);
  auto f = feq;
  f[2] += 2e-3;
  f[9] -= 1e-3;
  const Moments m = macroscopic<D3Q19>(f);
  const auto out = srt_collide<D3Q19>(f, 1.0, m.rho, m.u);
  const auto e = equilibrium<D3Q19>(m.u, m.rho);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_DOUBLE_EQ(out[i], e[i]);
}

TEST(Equilibrium, SecondMomentIsPressurePlusFlux) {
  const Vec3 u{0.04, 0.01, -0.03};
  const double rho = 0.95;
  const auto f = equilibrium<D3Q19>(u, rho);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double p = 0.0;
      for (std::size_t i = 0; i < 19; ++i) p += f[i] * D3Q19::c[i][a] * D3Q19::c[i][b];
      const double expect = rho * (a == b ? D3Q19::cs2 : 0.0) + rho * u[a] * u[b];
      EXPECT_NEAR(p, expect, 1e-14);
    }
}

TEST(Macroscopic, RejectsNonPositiveDensity) {
  Pdfs<D2Q9> f{};
  EXPECT_THROW((void)macroscopic<D2Q9>(f, {1, 2, 0}), InvalidStateError);
  f[0] = std::nan("");
  EXPECT_THROW((void)macroscopic<D2Q9>(f), InvalidStateError);
}

TEST(Relaxation, RejectsTauAtOrBelowHalf) {
  EXPECT_THROW(RelaxationParams(0.5), ArgumentError);
  EXPECT_NEAR(RelaxationParams::from_viscosity(1.0 / 6.0).tau(), 1.0, 1e-15);
  EXPECT_NEAR(RelaxationParams(0.8).viscosity(), 0.1, 1e-15);
}

TEST(WeightFraction, Endpoints) {
  for (const double tau : {0.51, 0.8, 1.0, 1.7}) {
    for (const auto mode : {FractionMode::direct, FractionMode::weighted}) {
      EXPECT_EQ(weight_fraction(0.0, tau, mode), 0.0);
      EXPECT_EQ(weight_fraction(1.0, tau, mode), 1.0);
    }
  }
}

TEST(WeightFraction, WeightedIsMonotoneAndBelowDirectForSmallTau) {
  const double tau = 0.7;
  double prev = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double eps = k / 100.0;
    const double b = weight_fraction(eps, tau, FractionMode::weighted);
    EXPECT_GE(b, prev);
    EXPECT_LE(b, eps + 1e-15);
    prev = b;
  }
  EXPECT_DOUBLE_EQ(weight_fraction(0.5, 1.0, FractionMode::weighted), 0.25);
}

TEST(WeightFraction, ClampsRoundOffAndRejectsOutOfRange) {
  EXPECT_EQ(weight_fraction(1.0 + 1e-12, 1.0, FractionMode::direct), 1.0);
  EXPECT_EQ(weight_fraction(-1e-12, 1.0, FractionMode::weighted), 0.0);
  EXPECT_THROW((void)weight_fraction(1.1, 1.0, FractionMode::direct), ArgumentError);
  EXPECT_THROW((void)weight_fraction(-0.01, 1.0, FractionMode::direct), ArgumentError);
}

TEST(SolidCollision, ConservesMassForAllVariants) {
  const auto f = equilibrium<D3Q19>({0.02, 0.0, -0.01}, 1.02);
  auto g = f;
  g[3] += 1e-3;
  g[4] -= 4e-4;
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    const auto m = macroscopic<D3Q19>(g);
    const auto o = solid_collision<D3Q19>(v, g, m.rho, m.u, {0.01, 0.0, 0.0}, 0.9);
    double s = 0.0;
    for (const double x : o) s += x;
    EXPECT_NEAR(s, 0.0, 1e-15) << to_string(v);
  }
}

TEST(SolidCollision, VanishesAtEquilibriumWithMatchingVelocity) {
  const Vec3 u{0.02, -0.01, 0.03};
  const auto f = equilibrium<D3Q19>(u, 1.0);
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    const auto o = solid_collision<D3Q19>(v, f, 1.0, u, u, 0.8);
    for (std::size_t i = 0; i < 19; ++i) EXPECT_NEAR(o[i], 0.0, 1e-15) << to_string(v);
  }
}

TEST(SolidCollision, VariantExamples) {
  const Vec3 us{0.02, 0.0, -0.01};
  const double rho = 1.01;
  const auto feq_s = equilibrium<D3Q19>(us, rho);
  // SC3 vanishes whenever f is the equilibrium at the solid velocity.
  const auto o3 = solid_collision<D3Q19>(SolidCollision::SC3, feq_s, rho, {0.04, 0.01, 0.0}, us, 0.8);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_NEAR(o3[i], 0.0, 1e-16);
  // SC2 at tau = 1 reduces to feq(rho, u_s) - f.
  auto f = equilibrium<D3Q19>({-0.01, 0.02, 0.0}, rho);
  f[5] += 1e-3;
  f[6] -= 1e-3;
  const Moments m = macroscopic<D3Q19>(f);
  const auto o2 = solid_collision<D3Q19>(SolidCollision::SC2, f, m.rho, m.u, us, 1.0);
  const auto e = equilibrium<D3Q19>(us, m.rho);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_NEAR(o2[i], e[i] - f[i], 1e-16);
  // SC1 by hand: [f_ib - feq_ib(u)] - [f_i - feq_i(u_s)].
  const auto o1 = solid_collision<D3Q19>(SolidCollision::SC1, f, m.rho, m.u, us, 0.8);
  const auto eu = equilibrium<D3Q19>(m.u, m.rho);
  for (std::size_t i = 0; i < 19; ++i) {
    const std::size_t b = D3Q19::opposite[i];
    EXPECT_NEAR(o1[i], (f[b] - eu[b]) - (f[i] - e[i]), 1e-16);
  }
}

TEST(Reduction, EmptyAndSingleCell) {
  EXPECT_EQ(norm(reduce_force({}, 1.0, 1.0)), 0.0);
  const std::vector<CoveredContribution> one{{0, 1.0, {0.3, 0.0, 0.0}, {2.5, 0.5, 0.5}}};
  const Vec3 F = reduce_force(one, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(F.x, 0.125 / 0.25 * 0.3);
  EXPECT_EQ(F.y, 0.0);
  EXPECT_EQ(F.z, 0.0);
}

TEST(Reduction, MirrorSymmetricFieldHasNoTorque) {
  const Vec3 R{5.0, 5.0, 5.0};
  std::vector<CoveredContribution> cells;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t k = 0; k < 500; ++k) {
    const Vec3 r{u(rng), u(rng), u(rng)}, m{u(rng), u(rng), u(rng)};
    const double B = 0.5 + 0.5 * u(rng);
    // Point reflection through R with the same momentum cancels r x m.
    cells.push_back({2 * k, B, m, R + r});
    cells.push_back({2 * k + 1, B, m, R - r});
  }
  const Vec3 T = reduce_torque(cells, R, 1.0, 1.0);
  EXPECT_NEAR(norm(T), 0.0, 1e-12);
}

TEST(Reduction, MatchesNaiveSumForAnyWorkerCount) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), b(0.0, 1.0);
  std::vector<CoveredContribution> cells(10000);
  for (std::size_t k = 0; k < cells.size(); ++k)
    cells[k] = {k, b(rng), {u(rng), u(rng), u(rng)}, {10 * b(rng), 10 * b(rng), 10 * b(rng)}};
  const Vec3 R{4.0, 5.0, 6.0};
  Vec3 Fn{}, Tn{};
  for (const auto& c : cells) {
    Fn += c.solid_momentum * c.B;
    Tn += cross(c.center - R, c.solid_momentum) * c.B;
  }
  for (const std::size_t w : {1U, 3U, 4U}) {
    WorkerPool pool(w);
    const Vec3 F = reduce_force(cells, 1.0, 1.0, &pool), T = reduce_torque(cells, R, 1.0, 1.0, &pool);
    EXPECT_LE(norm(F - Fn), 1e-12 * norm(Fn));
    EXPECT_LE(norm(T - Tn), 1e-12 * norm(Tn));
  }
}

TEST(Parsing, EnumsRoundTrip) {
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3})
    EXPECT_EQ(parse_solid_collision(to_string(v)), v);
  EXPECT_THROW((void)parse_solid_collision("SC4"), ArgumentError);
  EXPECT_EQ(parse_fraction_mode("direct"), FractionMode::direct);
  EXPECT_THROW((void)parse_fraction_mode("linear"), ArgumentError);
}

// With B = 0 everywhere the PSM kernel must reproduce the plain LBM kernel.
TEST(PsmKernel, ZeroSolidEqualsPlainLbmBitwise) {
  const GridDims d{9, 7, 5};
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    auto a = random_field<D3Q19>(d, 7);
    auto b = a;
    SolidFields solid(d);
    ASSERT_TRUE(lbm_stream_collide<D3Q19>(a, 0.77).ok());
    ASSERT_TRUE(psm_stream_collide<D3Q19>(b, solid, 0.77, v).ok());
    const auto da = a.dst(), db = b.dst();
    for (std::size_t k = 0; k < da.size(); ++k) ASSERT_EQ(da[k], db[k]) << k;
  }
}

// Partially covered cells against a scalar reference built from the
// per-cell collision functions.
TEST(PsmKernel, MatchesScalarReferenceAtPartialCoverage) {
  using S = D3Q19;
  const GridDims d{6, 5, 4};
  const double tau = 0.9;
  const auto layout = PaddedLayout{d, 3};
  for (const auto v : {SolidCollision::SC1, SolidCollision::SC2, SolidCollision::SC3}) {
    auto f = random_field<S>(d, 11);
    SolidFields solid(d);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.03, 0.03);
    for (std::size_t k = 0; k < d.cells(); ++k) {
      solid.B[k] = (k % 3 == 0) ? 0.5 : ((k % 3 == 1) ? 1.0 : 0.0);
      solid.u_s[k] = {u(rng), u(rng), u(rng)};
    }
    const auto before = f;
    ASSERT_TRUE(psm_stream_collide<S>(f, solid, tau, v).ok());
    const auto dst = f.dst();
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const std::size_t idx = d.index(x, y, z);
          const auto c = before.cell(x, y, z);
          const Moments m = macroscopic<S>(c);
          const auto post_f = srt_collide<S>(c, tau, m.rho, m.u);
          const auto os = solid_collision<S>(v, c, m.rho, m.u, solid.u_s[idx], tau);
          const double B = solid.B[idx];
          for (std::size_t i = 0; i < S::Q; ++i) {
            const double expect = c[i] + (1.0 - B) * (post_f[i] - c[i]) + B * os[i];
            const auto p = layout.raw(static_cast<std::int64_t>(x) + 1 + S::c[i][0],
                                      static_cast<std::int64_t>(y) + 1 + S::c[i][1],
                                      static_cast<std::int64_t>(z) + 1 + S::c[i][2]);
            ASSERT_NEAR(dst[i * f.stride() + p], expect, 1e-15) << to_string(v) << " cell " << idx << " dir " << i;
          }
        }
  }
}

TEST(PsmKernel, ReportsFirstBadCell) {
  const GridDims d{4, 4, 4};
  PdfField<D3Q19> f(d);
  for (std::size_t z = 0; z < 4; ++z)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) f.set_cell(x, y, z, equilibrium<D3Q19>({}, 1.0));
  f.set(0, 2, 1, 3, -5.0);
  f.set(0, 3, 3, 3, std::nan(""));
  const auto st = lbm_stream_collide<D3Q19>(f, 1.0);
  ASSERT_FALSE(st.ok());
  try {
    st.raise_if_bad(d, 17);
    FAIL();
  } catch (const InvalidStateError& e) {
    EXPECT_EQ(e.x(), 2);
    EXPECT_EQ(e.y(), 1);
    EXPECT_EQ(e.z(), 3);
    EXPECT_EQ(e.step(), 17);
  }
}

TEST(PsmKernel, WorkerCountDoesNotChangeResult) {
  const GridDims d{12, 10, 8};
  auto a = random_field<D3Q19>(d, 5);
  auto b = a;
  SolidFields sa(d), sb(d);
  for (std::size_t k = 0; k < d.cells(); k += 2) sa.B[k] = sb.B[k] = 0.3;
  WorkerPool pool(4);
  ASSERT_TRUE(psm_stream_collide<D3Q19>(a, sa, 0.8, SolidCollision::SC2).ok());
  ASSERT_TRUE(psm_stream_collide<D3Q19>(b, sb, 0.8, SolidCollision::SC2, &pool).ok());
  const auto da = a.dst(), db = b.dst();
  for (std::size_t k = 0; k < da.size(); ++k) ASSERT_EQ(da[k], db[k]);
}
