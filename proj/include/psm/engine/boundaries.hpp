#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psm/core/vec.hpp"
#include "psm/core/worker_pool.hpp"
#include "psm/engine/domain.hpp"
#include "psm/lattice/collision.hpp"
#include "psm/lattice/pdf_field.hpp"

namespace psm {

/// A population pushed into the ghost layer and where it goes next.
struct BoundaryLink {
  enum class Rule : std::uint8_t { wrap, bounce_back, velocity, pressure };
  std::size_t ghost = 0;   ///< padded index of the ghost slot
  std::size_t source = 0;  ///< padded index of the emitting interior cell
  std::size_t dest = 0;    ///< padded index of the receiving interior cell
  std::size_t inner = 0;   ///< padded index of the next cell inward from `source` (pressure rule)
  std::uint8_t dir = 0;
  std::uint8_t dest_dir = 0;
  std::uint8_t face = 0;
  Rule rule = Rule::wrap;
};

namespace detail {
// Edge and corner links that cross several faces take the rule of the
// strongest one: walls, then inflow, then outflow.
constexpr int rank(BoundaryType t) noexcept {
  switch (t) {
    case BoundaryType::no_slip: return 0;
    case BoundaryType::velocity_inflow: return 1;
    case BoundaryType::pressure_outflow: return 2;
    default: return 3;
  }
}
}  // namespace detail

/// Enumerates every link leaving the interior. Periodic crossings wrap; any
/// other crossing reflects the population back into its source cell.
template <Stencil S>
std::vector<BoundaryLink> build_boundary_links(const PaddedLayout& layout, const BoundarySpec& spec) {
  std::vector<BoundaryLink> links;
  const GridDims& d = layout.interior;
  const std::array<std::int64_t, 3> n{static_cast<std::int64_t>(d.nx), static_cast<std::int64_t>(d.ny),
                                      static_cast<std::int64_t>(d.nz)};
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        const bool shell = x == 0 || y == 0 || x + 1 == d.nx || y + 1 == d.ny ||
                           (S::D == 3 && (z == 0 || z + 1 == d.nz));
        if (!shell) continue;
        for (std::size_t i = 1; i < S::Q; ++i) {
          std::array<std::int64_t, 3> t{static_cast<std::int64_t>(x) + S::c[i][0],
                                        static_cast<std::int64_t>(y) + S::c[i][1],
                                        static_cast<std::int64_t>(z) + S::c[i][2]};
          bool outside = false;
          int reflect_face = -1;
          std::array<std::int64_t, 3> w = t;
          for (int a = 0; a < S::D; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (t[ua] >= 0 && t[ua] < n[ua]) continue;
            outside = true;
            const bool upper = t[ua] >= n[ua];
            const int face = 2 * a + (upper ? 1 : 0);
            const BoundaryType type = spec.faces[static_cast<std::size_t>(face)].type;
            if (type == BoundaryType::periodic)
              w[ua] = (t[ua] + n[ua]) % n[ua];
            else if (reflect_face < 0 ||
                     detail::rank(type) < detail::rank(spec.faces[static_cast<std::size_t>(reflect_face)].type))
              reflect_face = face;
          }
          if (!outside) continue;
          BoundaryLink link;
          link.source = layout.index(x, y, z);
          link.ghost = static_cast<std::size_t>(static_cast<std::int64_t>(link.source) + layout.offset(S::c[i]));
          link.dir = static_cast<std::uint8_t>(i);
          if (reflect_face >= 0) {
            link.face = static_cast<std::uint8_t>(reflect_face);
            link.dest = link.source;
            link.dest_dir = static_cast<std::uint8_t>(S::opposite[i]);
            switch (spec.faces[static_cast<std::size_t>(reflect_face)].type) {
              case BoundaryType::velocity_inflow: link.rule = BoundaryLink::Rule::velocity; break;
              case BoundaryType::pressure_outflow: {
                link.rule = BoundaryLink::Rule::pressure;
                const int a = reflect_face / 2;
                std::array<int, 3> inward{0, 0, 0};
                inward[static_cast<std::size_t>(a)] = reflect_face % 2 == 0 ? 1 : -1;
                link.inner = n[static_cast<std::size_t>(a)] > 1
                                 ? static_cast<std::size_t>(static_cast<std::int64_t>(link.source) + layout.offset(inward))
                                 : link.source;
                break;
              }
              default: link.rule = BoundaryLink::Rule::bounce_back; break;
            }
          } else {
            link.dest = layout.index(static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1]),
                                     static_cast<std::size_t>(w[2]));
            link.dest_dir = static_cast<std::uint8_t>(i);
            link.rule = BoundaryLink::Rule::wrap;
          }
          links.push_back(link);
        }
      }
  return links;
}

/// Resolves ghost-layer populations into the destination buffer.
///   wrap:        f_i(dest)       = g
///   bounce_back: f_ib(src)       = g                              (half-way)
///   velocity:    f_ib(src)       = g - 2 w_i rho c_i.u_w / cs2
///   pressure:    f_ib(src)       = -g + 2 w_i rho_w [1 + (c_i.u_w)^2/(2cs2^2) - u_w.u_w/(2cs2)]
/// where rho/u are moments of the current (pre-step) state and the pressure
/// rule extrapolates u_w = 3/2 u(src) - 1/2 u(inner) to the wall.
/// `wall_velocity_lattice` holds per-face inflow velocities in lattice units.
template <Stencil S>
void apply_boundaries(PdfField<S>& pdfs, const std::vector<BoundaryLink>& links, const BoundarySpec& spec,
                      const std::array<Vec3, 6>& wall_velocity_lattice) {
  const std::size_t stride = pdfs.stride();
  const double* src = pdfs.src().data();
  double* dst = pdfs.dst().data();
  auto source_moments = [&](std::size_t p) {
    Pdfs<S> f{};
    for (std::size_t i = 0; i < S::Q; ++i) f[i] = src[i * stride + p];
    return moments_unchecked<S>(f);
  };
  for (const auto& l : links) {
    const double g = dst[l.dir * stride + l.ghost];
    const std::size_t out = static_cast<std::size_t>(l.dest_dir) * stride + l.dest;
    const auto& c = S::c[l.dir];
    switch (l.rule) {
      case BoundaryLink::Rule::wrap:
      case BoundaryLink::Rule::bounce_back: dst[out] = g; break;
      case BoundaryLink::Rule::velocity: {
        const Vec3& uw = wall_velocity_lattice[l.face];
        const double rho = source_moments(l.source).rho;
        dst[out] = g - 2.0 * S::w[l.dir] * rho * (c[0] * uw.x + c[1] * uw.y + c[2] * uw.z) / S::cs2;
        break;
      }
      case BoundaryLink::Rule::pressure: {
        const Vec3 ub = source_moments(l.source).u;
        const Vec3 uw = ub * 1.5 - source_moments(l.inner).u * 0.5;
        const double rho_w = spec.faces[l.face].density;
        const double cu = (c[0] * uw.x + c[1] * uw.y + c[2] * uw.z);
        dst[out] = -g + 2.0 * S::w[l.dir] * rho_w *
                            (1.0 + cu * cu / (2.0 * S::cs2 * S::cs2) - dot(uw, uw) / (2.0 * S::cs2));
        break;
      }
    }
  }
}

}  // namespace psm
