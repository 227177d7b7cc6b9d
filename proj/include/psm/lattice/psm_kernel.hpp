#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/vec.hpp"
#include "psm/core/worker_pool.hpp"
#include "psm/lattice/collision.hpp"
#include "psm/lattice/pdf_field.hpp"

namespace psm {

inline constexpr std::int32_t kNoBody = -1;

/// Per-cell solid data read by the fused kernel: solid weight B, solid
/// velocity u_s (lattice units) and covering body id. `solid_momentum`
/// receives sum_i Omega^S_i c_i for every cell with B > 0 during a step.
struct SolidFields {
  explicit SolidFields(GridDims d)
      : dims(d), B(d.cells(), 0.0), u_s(d.cells()), body(d.cells(), kNoBody), solid_momentum(d.cells()) {}

  GridDims dims;
  std::vector<double> B;
  std::vector<Vec3> u_s;
  std::vector<std::int32_t> body;
  std::vector<Vec3> solid_momentum;

  void clear_cell(std::size_t idx) noexcept {
    B[idx] = 0.0;
    u_s[idx] = {};
    body[idx] = kNoBody;
    solid_momentum[idx] = {};
  }
};

/// Outcome of a kernel sweep; `bad_cell` is the lowest interior index whose
/// density was non-positive or non-finite.
struct KernelStatus {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t bad_cell = npos;
  double bad_rho = 0.0;

  [[nodiscard]] bool ok() const noexcept { return bad_cell == npos; }

  void raise_if_bad(const GridDims& dims, std::int64_t step = -1) const {
    if (ok()) return;
    const auto c = dims.coords(bad_cell);
    throw InvalidStateError("invalid density " + std::to_string(bad_rho), static_cast<std::int64_t>(c[0]),
                            static_cast<std::int64_t>(c[1]), static_cast<std::int64_t>(c[2]), step);
  }
};

namespace detail {

class BadCellTracker {
 public:
  void report(std::size_t idx, double rho) noexcept {
    std::size_t cur = first_.load(std::memory_order_relaxed);
    while (idx < cur && !first_.compare_exchange_weak(cur, idx)) {
    }
    if (first_.load() == idx) rho_.store(rho);
  }
  [[nodiscard]] KernelStatus status() const noexcept { return {first_.load(), rho_.load()}; }

 private:
  std::atomic<std::size_t> first_{KernelStatus::npos};
  std::atomic<double> rho_{0.0};
};

template <Stencil S>
std::array<std::int64_t, S::Q> push_offsets(const PaddedLayout& layout) noexcept {
  std::array<std::int64_t, S::Q> off{};
  for (std::size_t i = 0; i < S::Q; ++i) off[i] = layout.offset(S::c[i]);
  return off;
}

template <typename RowFn>
void for_rows(const GridDims& d, WorkerPool* pool, RowFn&& row_fn) {
  const std::size_t rows = d.ny * d.nz;
  auto body = [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) row_fn(r % d.ny, r / d.ny);
  };
  if (pool)
    pool->parallel_for(rows, body);
  else
    body(0, rows);
}

}  // namespace detail

/// Plain SRT stream-collide: every interior cell collides and pushes
/// f_i + Omega^F_i to (x + c_i) of the destination buffer. Populations
/// leaving the interior land in the ghost layer for the boundary pass.
template <Stencil S>
KernelStatus lbm_stream_collide(PdfField<S>& pdfs, double tau, WorkerPool* pool = nullptr) {
  constexpr std::size_t Q = S::Q;
  const PaddedLayout& L = pdfs.layout();
  const GridDims& d = L.interior;
  const std::size_t stride = pdfs.stride();
  const double* src = pdfs.src().data();
  double* dst = pdfs.dst().data();
  const auto off = detail::push_offsets<S>(L);
  const double omega = 1.0 / tau;
  detail::BadCellTracker bad;

  detail::for_rows(d, pool, [&](std::size_t y, std::size_t z) {
    std::size_t p = L.index(0, y, z);
    const std::size_t idx0 = d.index(0, y, z);
    for (std::size_t x = 0; x < d.nx; ++x, ++p) {
      double f[Q];
      double rho = 0.0, jx = 0.0, jy = 0.0, jz = 0.0;
      for (std::size_t i = 0; i < Q; ++i) {
        f[i] = src[i * stride + p];
        rho += f[i];
        jx += f[i] * S::c[i][0];
        jy += f[i] * S::c[i][1];
        jz += f[i] * S::c[i][2];
      }
      if (!(rho > 0.0) || !std::isfinite(rho)) bad.report(idx0 + x, rho);
      const double inv = 1.0 / rho;
      const double ux = jx * inv, uy = jy * inv, uz = jz * inv;
      const double usq = (ux * ux + uy * uy + uz * uz) / (2.0 * S::cs2);
      for (std::size_t i = 0; i < Q; ++i) {
        const double cu = (S::c[i][0] * ux + S::c[i][1] * uy + S::c[i][2] * uz) / S::cs2;
        const double feq = S::w[i] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
        dst[i * stride + static_cast<std::size_t>(static_cast<std::int64_t>(p) + off[i])] = f[i] - omega * (f[i] - feq);
      }
    }
  });
  return bad.status();
}

/// Fused partially-saturated-cells stream-collide:
///   f_i(x + c_i, t+1) = f_i + (1 - B) Omega^F_i + B Omega^S_i.
/// Cells with B == 0 take the plain SRT path. For B > 0 the kernel stores
/// sum_i Omega^S_i c_i into `solid.solid_momentum` for the force reduction.
template <Stencil S>
KernelStatus psm_stream_collide(PdfField<S>& pdfs, SolidFields& solid, double tau, SolidCollision variant,
                                WorkerPool* pool = nullptr) {
  constexpr std::size_t Q = S::Q;
  const PaddedLayout& L = pdfs.layout();
  const GridDims& d = L.interior;
  const std::size_t stride = pdfs.stride();
  const double* src = pdfs.src().data();
  double* dst = pdfs.dst().data();
  const double* Bf = solid.B.data();
  const Vec3* us_f = solid.u_s.data();
  Vec3* mom = solid.solid_momentum.data();
  const auto off = detail::push_offsets<S>(L);
  const double omega = 1.0 / tau;
  detail::BadCellTracker bad;

  detail::for_rows(d, pool, [&](std::size_t y, std::size_t z) {
    std::size_t p = L.index(0, y, z);
    const std::size_t idx0 = d.index(0, y, z);
    for (std::size_t x = 0; x < d.nx; ++x, ++p) {
      const std::size_t idx = idx0 + x;
      double f[Q];
      double rho = 0.0, jx = 0.0, jy = 0.0, jz = 0.0;
      for (std::size_t i = 0; i < Q; ++i) {
        f[i] = src[i * stride + p];
        rho += f[i];
        jx += f[i] * S::c[i][0];
        jy += f[i] * S::c[i][1];
        jz += f[i] * S::c[i][2];
      }
      if (!(rho > 0.0) || !std::isfinite(rho)) bad.report(idx, rho);
      const double inv = 1.0 / rho;
      const double ux = jx * inv, uy = jy * inv, uz = jz * inv;
      const double usq = (ux * ux + uy * uy + uz * uz) / (2.0 * S::cs2);
      const double B = Bf[idx];

      if (B == 0.0) {
        for (std::size_t i = 0; i < Q; ++i) {
          const double cu = (S::c[i][0] * ux + S::c[i][1] * uy + S::c[i][2] * uz) / S::cs2;
          const double feq = S::w[i] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
          dst[i * stride + static_cast<std::size_t>(static_cast<std::int64_t>(p) + off[i])] =
              f[i] - omega * (f[i] - feq);
        }
        continue;
      }

      const Vec3 us = us_f[idx];
      const double ussq = (us.x * us.x + us.y * us.y + us.z * us.z) / (2.0 * S::cs2);
      double feq[Q], feq_s[Q];
      for (std::size_t i = 0; i < Q; ++i) {
        const double cu = (S::c[i][0] * ux + S::c[i][1] * uy + S::c[i][2] * uz) / S::cs2;
        feq[i] = S::w[i] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
        const double cus = (S::c[i][0] * us.x + S::c[i][1] * us.y + S::c[i][2] * us.z) / S::cs2;
        feq_s[i] = S::w[i] * rho * (1.0 + cus + 0.5 * cus * cus - ussq);
      }
      double mx = 0.0, my = 0.0, mz = 0.0;
      const double keep = 1.0 - omega;
      for (std::size_t i = 0; i < Q; ++i) {
        const std::size_t ib = S::opposite[i];
        double os;
        switch (variant) {
          case SolidCollision::SC1: os = (f[ib] - feq[ib]) - (f[i] - feq_s[i]); break;
          case SolidCollision::SC2: os = (feq_s[i] - f[i]) + keep * (f[i] - feq[i]); break;
          default: os = (f[ib] - feq_s[ib]) - (f[i] - feq_s[i]); break;
        }
        const double of = -omega * (f[i] - feq[i]);
        mx += os * S::c[i][0];
        my += os * S::c[i][1];
        mz += os * S::c[i][2];
        dst[i * stride + static_cast<std::size_t>(static_cast<std::int64_t>(p) + off[i])] =
            f[i] + (1.0 - B) * of + B * os;
      }
      mom[idx] = {mx, my, mz};
    }
  });
  return bad.status();
}

}  // namespace psm
