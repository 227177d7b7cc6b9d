#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psm/core/vec.hpp"
#include "psm/core/worker_pool.hpp"

namespace psm {

/// One cell touched by a body: interior index, weight B, the cell's
/// sum_i Omega^S_i c_i, and its center (same frame as the body center).
struct CoveredContribution {
  std::size_t cell = 0;
  double B = 0.0;
  Vec3 solid_momentum{};
  Vec3 center{};
};

// Chunk size is fixed so partial sums, and therefore results, do not depend
// on the number of workers.
inline constexpr std::size_t kReductionChunk = 2048;

namespace detail {

template <typename Term>
Vec3 chunked_sum(std::size_t n, WorkerPool* pool, Term&& term) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<Vec3> partial(chunks);
  auto run = [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      Vec3 s{};
      const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
      for (std::size_t k = c * kReductionChunk; k < end; ++k) s += term(k);
      partial[c] = s;
    }
  };
  if (pool)
    pool->parallel_for(chunks, run);
  else
    run(0, chunks);
  Vec3 total{};
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace detail

/// F = (dx^3 / dt) sum_cells B sum_i Omega^S_i c_i.
/// This is the momentum the solid term imparts to the fluid per step; the
/// hydrodynamic force on the body is its negative.
inline Vec3 reduce_force(std::span<const CoveredContribution> cells, double dx, double dt, WorkerPool* pool = nullptr) {
  const Vec3 s = detail::chunked_sum(cells.size(), pool, [&](std::size_t k) {
    return cells[k].solid_momentum * cells[k].B;
  });
  return s * (dx * dx * dx / dt);
}

/// T = (dx^3 / dt) sum_cells B (x_s - R) x sum_i Omega^S_i c_i.
inline Vec3 reduce_torque(std::span<const CoveredContribution> cells, const Vec3& center, double dx, double dt,
                          WorkerPool* pool = nullptr) {
  const Vec3 s = detail::chunked_sum(cells.size(), pool, [&](std::size_t k) {
    return cross(cells[k].center - center, cells[k].solid_momentum) * cells[k].B;
  });
  return s * (dx * dx * dx / dt);
}

}  // namespace psm
