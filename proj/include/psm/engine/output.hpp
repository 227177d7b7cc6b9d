#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/version.hpp"
#include "psm/engine/simulation.hpp"

namespace psm {

/// Reproducibility header written at the top of every output file.
struct RunMetadata {
  std::string config_hash = "none";
  std::size_t workers = 1;
  std::vector<std::pair<std::string, std::string>> extra;

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> lines() const {
    std::vector<std::pair<std::string, std::string>> out{
        {"version", kVersion}, {"config_hash", config_hash}, {"workers", std::to_string(workers)}};
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
  }
};

/// Shortest round-trip decimal form; identical bits give identical text.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

inline void check_stream(const std::ofstream& out, const std::string& path) {
  if (!out) throw IoError(path, "write failed");
}

/// Comma-separated table with '#'-prefixed metadata lines.
class CsvWriter {
 public:
  CsvWriter(std::string path, const RunMetadata& meta, std::span<const std::string> columns)
      : path_(std::move(path)), out_(open_output(path_)), width_(columns.size()) {
    for (const auto& [k, v] : meta.lines()) out_ << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
    check_stream(out_, path_);
  }

  void row(std::span<const double> values) {
    if (values.size() != width_) throw ArgumentError("csv row width mismatch for " + path_);
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
    ++rows_;
    check_stream(out_, path_);
  }

  void flush() {
    out_.flush();
    check_stream(out_, path_);
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

/// Columns of the step series: step, time, mass, max_u, then per body
/// fx, fy, fz, tx, ty, tz.
inline std::vector<std::string> step_series_columns(std::size_t bodies) {
  std::vector<std::string> c{"step", "time", "mass", "max_u"};
  for (std::size_t b = 0; b < bodies; ++b)
    for (const char* k : {"fx", "fy", "fz", "tx", "ty", "tz"}) c.push_back("b" + std::to_string(b) + "_" + k);
  return c;
}

inline std::vector<double> step_series_row(const StepReport& r, double dt) {
  std::vector<double> v{static_cast<double>(r.step), static_cast<double>(r.step) * dt, r.mass, r.max_u};
  for (const auto& l : r.bodies) v.insert(v.end(), {l.force.x, l.force.y, l.force.z, l.torque.x, l.torque.y, l.torque.z});
  return v;
}

inline std::vector<std::string> body_trace_columns() {
  return {"step", "time", "rx", "ry", "rz", "vx", "vy", "vz", "wx", "wy", "wz",
          "fx", "fy", "fz", "tx", "ty", "tz"};
}

inline std::vector<double> body_trace_row(std::uint64_t step, double dt, const RigidBody& b, const BodyLoad& l) {
  const Vec3& R = b.center();
  return {static_cast<double>(step), static_cast<double>(step) * dt,
          R.x, R.y, R.z,
          b.velocity.x, b.velocity.y, b.velocity.z,
          b.angular_velocity.x, b.angular_velocity.y, b.angular_velocity.z,
          l.force.x, l.force.y, l.force.z,
          l.torque.x, l.torque.y, l.torque.z};
}

/// Legacy-format VTK snapshot (ASCII STRUCTURED_POINTS) with cell data
/// rho, velocity (SI) and B. Metadata goes into the title line.
template <Stencil S>
void write_vtk(const Simulation<S>& sim, const std::string& path, const RunMetadata& meta) {
  auto out = open_output(path);
  const auto& d = sim.domain().extents;
  const double dx = sim.domain().dx;
  std::string title = "psm";
  for (const auto& [k, v] : meta.lines()) title += " " + k + "=" + v;
  title += " step=" + std::to_string(sim.steps_done());
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << d.nx + 1 << ' ' << d.ny + 1 << ' ' << d.nz + 1 << '\n';
  out << "ORIGIN 0 0 0\nSPACING " << format_double(dx) << ' ' << format_double(dx) << ' ' << format_double(dx) << '\n';
  out << "CELL_DATA " << d.cells() << '\n';

  std::vector<Moments> m(d.cells());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) m[d.index(x, y, z)] = sim.moments_at(x, y, z);

  out << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (const auto& c : m) out << format_double(c.rho) << '\n';
  out << "VECTORS velocity double\n";
  for (const auto& c : m) {
    const Vec3 u = sim.units().velocity_to_si(c.u);
    out << format_double(u.x) << ' ' << format_double(u.y) << ' ' << format_double(u.z) << '\n';
  }
  out << "SCALARS B double 1\nLOOKUP_TABLE default\n";
  for (double b : sim.solid().B) out << format_double(b) << '\n';
  check_stream(out, path);
}

}  // namespace psm
