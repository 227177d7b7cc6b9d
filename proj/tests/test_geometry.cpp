#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "psm/geometry/fraction.hpp"
#include "psm/geometry/mesh.hpp"
#include "psm/geometry/pose.hpp"
#include "psm/geometry/voxelizer.hpp"

using namespace psm;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<unsigned char> binary_stl(const TriangleMesh& m) {
  std::ostringstream os(std::ios::binary);
  write_stl_binary(m, os);
  return to_bytes(os.str());
}

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "psm_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Mesh, BinaryCubeWeldsToEightVertices) {
  const auto bytes = binary_stl(make_cube(1.0));
  const TriangleMesh m = load_mesh(bytes, detect_stl_format(bytes));
  EXPECT_EQ(m.faces.size(), 12U);
  EXPECT_EQ(m.vertices.size(), 8U);
  EXPECT_EQ(m.raw_vertex_count, 36U);
  EXPECT_NEAR(m.volume(), 1.0, 1e-6);
}

TEST(Mesh, AsciiStlMatchesBinary) {
  const TriangleMesh cube = make_cube(2.0, {0.5, 0.25, 0});
  std::ostringstream os;
  write_stl_ascii(cube, os);
  const auto ascii = to_bytes(os.str());
  ASSERT_EQ(detect_stl_format(ascii), MeshFormat::stl_ascii);
  const TriangleMesh a = load_mesh(ascii, MeshFormat::stl_ascii);
  const auto bin = binary_stl(cube);
  const TriangleMesh b = load_mesh(bin, MeshFormat::stl_binary);
  EXPECT_EQ(a.faces.size(), b.faces.size());
  EXPECT_EQ(a.vertices.size(), b.vertices.size());
  EXPECT_NEAR(a.volume(), b.volume(), 1e-6);
  EXPECT_NEAR(a.volume(), 8.0, 1e-5);
}

TEST(Mesh, ObjWithQuadsAndNegativeIndices) {
  const std::string obj =
      "# unit tetra plus fan\n"
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "f 1 3 2\nf 1 2 4\nf -4/1/1 -1/2/2 -2/3/3\nf 2 3 4\n";
  const TriangleMesh m = load_mesh(to_bytes(obj), MeshFormat::obj);
  EXPECT_EQ(m.faces.size(), 4U);
  EXPECT_NEAR(m.volume(), 1.0 / 6.0, 1e-12);
  const std::string quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  const TriangleMesh q = load_mesh(to_bytes(quad), MeshFormat::obj, {false});
  EXPECT_EQ(q.faces.size(), 2U);
}

TEST(Mesh, TruncatedBinaryStlReportsOffset) {
  auto bytes = binary_stl(make_cube(1.0));
  bytes.resize(bytes.size() - 30);
  try {
    (void)load_mesh(bytes, MeshFormat::stl_binary);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.byte_offset(), bytes.size());
  }
}

TEST(Mesh, OpenSurfaceIsRejectedInStrictMode) {
  TriangleMesh m = make_cube(1.0);
  m.faces.pop_back();
  const auto topo = check_topology(m);
  EXPECT_FALSE(topo.watertight());
  EXPECT_EQ(topo.non_manifold_edges.size(), 3U);
  const auto bytes = binary_stl(m);
  EXPECT_THROW((void)load_mesh(bytes, MeshFormat::stl_binary), TopologyError);
  EXPECT_NO_THROW((void)load_mesh(bytes, MeshFormat::stl_binary, {false}));
  EXPECT_THROW((void)voxelize(m, 0.25, 0), TopologyError);
}

TEST(Mesh, UnsupportedExtensionIsIoError) {
  const auto p = temp_path("mesh.ply");
  std::ofstream(p) << "ply\n";
  EXPECT_THROW((void)load_mesh_file(p), IoError);
}

TEST(Mesh, PrimitivesAreClosedWithExpectedVolume) {
  const TriangleMesh s = make_icosphere(1.0, 4);
  EXPECT_TRUE(check_topology(s).watertight());
  EXPECT_NEAR(s.volume(), 4.0 / 3.0 * std::numbers::pi, 0.02 * 4.0);
  const TriangleMesh b = make_box({1, 2, 3});
  EXPECT_TRUE(check_topology(b).watertight());
  EXPECT_NEAR(b.volume(), 48.0, 1e-12);
  const TriangleMesh blade = make_twisted_blade(1.0, 0.3, 0.05, std::numbers::pi / 3, 24);
  EXPECT_TRUE(check_topology(blade).watertight());
  EXPECT_GT(blade.signed_volume(), 0.0);
}

TEST(Voxelize, AlignedCubeGivesExactBits) {
  // Side 4 dx with faces on cell boundaries: 4^3 samples at s = 0.
  const GeometryField g = voxelize(make_cube(4.0), 1.0, 0);
  EXPECT_EQ(g.count_inside(), 64U);
  EXPECT_DOUBLE_EQ(g.inside_volume(), 64.0);
  const GeometryField g2 = voxelize(make_cube(4.0), 1.0, 2);
  EXPECT_EQ(g2.count_inside(), 64U * 64U);
}

TEST(Voxelize, SphereVolumeWithinTwoPercent) {
  // 20 cells per diameter, s = 1.
  const double r = 10.0;
  const GeometryField g = voxelize(make_icosphere(r, 5), 1.0, 1);
  const double exact = make_icosphere(r, 5).volume();
  EXPECT_NEAR(g.inside_volume(), exact, 0.02 * exact);
  const GeometryField a = voxelize_sphere(r, 1.0, 1);
  const double analytic = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  EXPECT_NEAR(a.inside_volume(), analytic, 0.02 * analytic);
}

TEST(Voxelize, OrientationFlipDoesNotChangeClassification) {
  TriangleMesh m = make_twisted_blade(12.0, 4.0, 1.5, 1.0, 16);
  const GeometryField a = voxelize(m, 1.0, 1);
  m.flip_orientation();
  const GeometryField b = voxelize(m, 1.0, 1);
  EXPECT_EQ(a.words(), b.words());
  EXPECT_GT(a.count_inside(), 0U);
}

TEST(Voxelize, MatchesBruteForcePointClassification) {
  const TriangleMesh m = make_twisted_blade(10.0, 3.0, 1.2, 0.8, 12);
  const GeometryField g = voxelize(m, 1.0, 1);
  const auto e = g.extents();
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < e[2]; ++k)
    for (std::size_t j = 0; j < e[1]; ++j)
      for (std::size_t i = 0; i < e[0]; ++i)
        if (g.test(i, j, k) != point_inside(m, g.sample_center(i, j, k))) ++mismatches;
  EXPECT_EQ(mismatches, 0U);
}

TEST(Voxelize, MemoryCapIsResourceError) {
  VoxelizeOptions o;
  o.memory_cap_bytes = 1024;
  EXPECT_THROW((void)voxelize(make_cube(10.0), 1.0, 3, o), ResourceError);
  EXPECT_THROW((void)voxelize(make_cube(1.0), 1.0, -1), ArgumentError);
}

TEST(GeometryCache, RoundTripAndByteIdentical) {
  const GeometryField g = voxelize(make_twisted_blade(8.0, 2.4, 0.8, 0.5, 8), 0.5, 2);
  const auto p = temp_path("blade.geo");
  write_geometry_cache(g, p);
  const GeometryField back = read_geometry_cache(p);
  EXPECT_TRUE(back == g);
  EXPECT_EQ(encode_geometry_cache(back), encode_geometry_cache(g));
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST(GeometryCache, RejectsCorruptFiles) {
  auto bytes = encode_geometry_cache(voxelize(make_cube(2.0), 1.0, 0));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW((void)decode_geometry_cache(bad), ParseError);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  EXPECT_THROW((void)decode_geometry_cache(cut), ParseError);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW((void)decode_geometry_cache(extra), ParseError);
}

TEST(Pose, RoundTrip) {
  Pose p;
  p.rotation = rotation_about({1, -2, 0.5}, 0.9);
  p.translation = {3, 4, 5};
  EXPECT_TRUE(p.valid());
  const Vec3 x{0.3, -1.2, 7.0};
  const Vec3 back = p.to_world(p.to_body(x));
  EXPECT_NEAR(back.x, x.x, 1e-14);
  EXPECT_NEAR(back.y, x.y, 1e-14);
  EXPECT_NEAR(back.z, x.z, 1e-14);
  Pose q;
  q.rotation(0, 1) = 0.1;
  EXPECT_FALSE(q.valid());
}

TEST(Overlap, IdentityPoseEqualsDownsampledField) {
  // Cube side 6 at s = 2, aligned to the lattice.
  const GeometryField g = voxelize(make_cube(6.0), 1.0, 2);
  const GridGeometry grid{{12, 12, 12}, 1.0, {0, 0, 0}};
  Pose p;
  p.translation = {6.0, 6.0, 6.0};
  const auto cov = compute_overlap(g, p, grid);
  ASSERT_EQ(cov.size(), 216U);
  for (const auto& c : cov) EXPECT_EQ(c.eps, 1.0);
  // Half-cell shift: faces cut cells in half.
  p.translation = {6.5, 6.0, 6.0};
  const auto half = compute_overlap(g, p, grid);
  EXPECT_NEAR(fraction_volume(half, 1.0), 216.0, 1e-12);
  std::size_t partial = 0;
  for (const auto& c : half) partial += (c.eps == 0.5) ? 1U : 0U;
  EXPECT_EQ(partial, 72U);
}

TEST(Overlap, QuarterTurnOfCubeIsCellExact) {
  const GeometryField g = voxelize(make_box({3.0, 2.0, 1.5}), 1.0, 1);
  const std::size_t n = 16;
  const GridGeometry grid{{n, n, n}, 1.0, {0, 0, 0}};
  Pose a;
  a.translation = {8.0, 8.0, 8.0};
  Pose b = a;
  b.rotation = rotation_about({0, 0, 1}, std::numbers::pi / 2);
  const auto ca = compute_overlap(g, a, grid);
  const auto cb = compute_overlap(g, b, grid);
  std::vector<double> fa(grid.dims.cells(), 0.0), fb(grid.dims.cells(), 0.0);
  for (const auto& c : ca) fa[c.cell] = c.eps;
  for (const auto& c : cb) fb[c.cell] = c.eps;
  // (x, y) -> (n-1-y, x) about the center at 8.
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        ASSERT_NEAR(fb[grid.dims.index(n - 1 - y, x, z)], fa[grid.dims.index(x, y, z)], 1e-12) << x << ' ' << y << ' ' << z;
}

TEST(Overlap, SpacingMismatchAndOutsideGrid) {
  const GeometryField g = voxelize(make_cube(2.0), 0.5, 0);
  const GridGeometry grid{{8, 8, 8}, 1.0, {0, 0, 0}};
  EXPECT_THROW((void)compute_overlap(g, Pose{}, grid), ArgumentError);
  const GridGeometry ok{{8, 8, 8}, 0.5, {0, 0, 0}};
  Pose far;
  far.translation = {100, 100, 100};
  EXPECT_TRUE(compute_overlap(g, far, ok).empty());
}

TEST(Overlap, WorkerCountDoesNotChangeCoverage) {
  const GeometryField g = voxelize(make_twisted_blade(10.0, 3.0, 1.0, 1.0, 12), 1.0, 2);
  const GridGeometry grid{{24, 24, 24}, 1.0, {0, 0, 0}};
  Pose p;
  p.rotation = rotation_about({1, 2, 3}, 0.7);
  p.translation = {12.2, 11.7, 12.5};
  WorkerPool pool(3);
  const auto a = compute_overlap(g, p, grid);
  const auto b = compute_overlap(g, p, grid, &pool);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].cell, b[k].cell);
    EXPECT_EQ(a[k].eps, b[k].eps);
  }
}

TEST(FractionVolume, Trivial) {
  std::vector<double> B(27, 0.0);
  EXPECT_EQ(fraction_volume(B, 1.0), 0.0);
  B[13] = 1.0;
  EXPECT_EQ(fraction_volume(B, 1.0), 1.0);
  EXPECT_NEAR(fraction_volume(B, 0.1), 1e-3, 1e-18);
}

TEST(FractionField, WeightedModeAppliesTau) {
  const GeometryField g = voxelize(make_cube(6.0), 1.0, 2);
  const GridGeometry grid{{12, 12, 12}, 1.0, {0, 0, 0}};
  Pose p;
  p.translation = {6.5, 6.0, 6.0};
  const auto f = fraction_field_from_geometry(g, p, grid, 1.0, FractionMode::weighted);
  for (const auto& c : f.coverage) {
    const double expect = c.eps == 0.5 ? 0.25 : c.eps;
    EXPECT_NEAR(f.B[c.cell], expect, 1e-15);
  }
}
