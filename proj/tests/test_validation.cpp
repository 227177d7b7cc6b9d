#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "psm/validation/convergence.hpp"
#include "psm/validation/settling.hpp"
#include "psm/validation/volume_suite.hpp"

using namespace psm;
using namespace psm::validation;
namespace fs = std::filesystem;

namespace {

const char* kCase = R"({
  "name": "T", "re_label": 1.5,
  "fluid": { "density": 970, "dynamic_viscosity": 0.373 },
  "sphere": { "diameter": 0.015, "density": 1120, "release_height": 0.1275 },
  "container": [0.1, 0.1, 0.16],
  "terminal_velocity": 0.038
})";

}  // namespace

TEST(Convergence, LogLogSlopeOfPowerLaw) {
  const std::vector<double> h{0.1, 0.05, 0.025};
  EXPECT_NEAR(loglog_slope(h, {3e-2, 7.5e-3, 1.875e-3}), 2.0, 1e-12);
  EXPECT_NEAR(loglog_slope(h, {1.0, 0.5, 0.25}), 1.0, 1e-12);
}

TEST(Convergence, TaylorGreenInitialFieldIsExact) {
  const TaylorGreen tg{16, 0.8, 0.01};
  auto sim = tg.make_simulation();
  EXPECT_LT(tg.velocity_error(sim, 0.0), 1e-14);
}

TEST(Convergence, TaylorGreenDecayRateAtSmallSize) {
  const TaylorGreen tg{32, 0.8, 0.02};
  const auto r = taylor_green_decay_rate(tg, 0, 400);
  EXPECT_LT(r.relative_error, 0.05);
}

TEST(Convergence, IdenticalRunsGiveIdenticalError) {
  const auto a = taylor_green_convergence({8, 16}, 0.8, 0.04);
  const auto b = taylor_green_convergence({8, 16}, 0.8, 0.04);
  EXPECT_EQ(a.errors, b.errors);
}

TEST(Settling, MonotoneRise) {
  EXPECT_TRUE(monotone_rise({0.0, 0.5, 0.9, 1.0, 0.8}));
  EXPECT_TRUE(monotone_rise({0.0, 0.5, 0.495, 1.0}));
  EXPECT_FALSE(monotone_rise({0.0, 0.5, 0.4, 1.0}));
  EXPECT_FALSE(monotone_rise({}));
}

TEST(Settling, SinglePlateauWithHysteresis) {
  EXPECT_TRUE(single_plateau({0.1, 0.5, 0.99, 1.0, 0.97, 0.99, 1.0, 0.5}));
  EXPECT_FALSE(single_plateau({0.1, 1.0, 0.5, 1.0, 0.2}));
}

TEST(Settling, CaseParsesAndDerivesReynolds) {
  const SettlingCase c = parse_settling_case(parse_json_text(kCase));
  EXPECT_NEAR(c.reynolds(), 970 * 0.038 * 0.015 / 0.373, 1e-12);
  EXPECT_NEAR(c.kinematic_viscosity(), 0.373 / 970, 1e-15);
  EXPECT_EQ(c.full_extents.nx, 135U);
}

TEST(Settling, MislabeledReynoldsRejected) {
  Json j = parse_json_text(kCase);
  j["re_label"] = 15.0;
  EXPECT_THROW((void)parse_settling_case(j), ConfigError);
  j = parse_json_text(kCase);
  j["sphere"]["release_height"] = 0.2;
  EXPECT_THROW((void)parse_settling_case(j), ConfigError);
  j = parse_json_text(kCase);
  j["fluid"]["colour"] = "amber";
  EXPECT_THROW((void)parse_settling_case(j), ConfigError);
}

TEST(Settling, ShippedCasesLoad) {
  for (const char* n : {"e1", "e2", "e3", "e4"}) {
    const auto c = load_settling_case(fs::path(PSM_SOURCE_DIR) / "configs" / "settling" / (std::string(n) + ".json"));
    EXPECT_NEAR(c.reynolds(), c.re_label, 0.02 * c.re_label) << n;
  }
}

TEST(Settling, ScaledExtentsRoundUp) {
  const GridDims f{135, 135, 216};
  const auto q = scaled_extents(f, Scale::quarter), h = scaled_extents(f, Scale::half);
  EXPECT_EQ(q.nx, 34U);
  EXPECT_EQ(q.nz, 54U);
  EXPECT_EQ(h.nx, 68U);
  EXPECT_EQ(h.nz, 108U);
  EXPECT_THROW((void)parse_scale("eighth"), ArgumentError);
}

TEST(Settling, ShortRunProducesExpectedRowCount) {
  SettlingCase c = parse_settling_case(parse_json_text(kCase));
  SettlingOptions o;
  o.end_time = 0.05;
  o.supersampling = 1;
  const auto r = run_settling_case(c, o);
  const Domain d = settling_domain(c, o);
  const auto expect = static_cast<std::size_t>(std::ceil(o.end_time / d.dt - 1e-9));
  EXPECT_EQ(r.samples.size(), expect);
  EXPECT_EQ(r.status, SettlingStatus::ok);
  EXPECT_GT(r.max_velocity, 0.0);
  for (std::size_t i = 1; i < r.samples.size(); ++i) EXPECT_LT(r.samples[i].height, r.samples[i - 1].height);
}

TEST(Settling, ReferenceCurveReader) {
  const auto p = fs::temp_directory_path() / "psm_ref.csv";
  std::ofstream(p) << "# header\ntime,velocity\n0,0\n0.5,-0.03\n1.0,-0.035\n";
  const auto v = read_reference_curve(p);
  ASSERT_EQ(v.size(), 3U);
  EXPECT_DOUBLE_EQ(v[2].second, -0.035);
}

TEST(VolumeSuite, CubeSmallCase) {
  VolumeErrorCase c;
  c.geometry = VolumeGeometry::cube;
  c.N = 10;
  c.s = 1;
  c.steps = 10;
  const auto r = run_volume_case(c);
  EXPECT_EQ(r.status, CaseStatus::ok);
  EXPECT_NEAR(r.reference_volume, 1000.0, 1e-9);
  EXPECT_LT(r.error, 1e-3);
}

TEST(VolumeSuite, MissingMeshIsSkipped) {
  VolumeErrorCase c;
  c.geometry = VolumeGeometry::mesh;
  c.mesh_path = "/nonexistent/bunny.stl";
  EXPECT_EQ(run_volume_case(c).status, CaseStatus::skipped);
}

TEST(VolumeSuite, MemoryCapSkipsCase) {
  const auto t = run_volume_table(VolumeGeometry::cube, {10}, {3}, "", nullptr, 1024);
  ASSERT_EQ(t.rows.size(), 1U);
  EXPECT_EQ(t.rows[0].status, CaseStatus::skipped);
  EXPECT_NE(t.markdown().find("skipped"), std::string::npos);
}

TEST(VolumeSuite, ReferenceTables) {
  EXPECT_TRUE(reference_error(VolumeGeometry::cube, 20, 1).has_value());
  EXPECT_FALSE(reference_error(VolumeGeometry::blade, 20, 1).has_value());
  EXPECT_TRUE(within_reference_band(1e-6, 1.44e-7));
  EXPECT_FALSE(within_reference_band(2e-6, 1.44e-7));
}
