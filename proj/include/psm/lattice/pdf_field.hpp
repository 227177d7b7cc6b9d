#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "psm/lattice/grid.hpp"
#include "psm/lattice/stencil.hpp"

namespace psm {

/// Double-buffered PDFs in structure-of-arrays layout: direction-major,
/// x-fastest over the padded grid. A step reads `src()` and writes `dst()`,
/// then `swap()` flips the roles.
template <Stencil S>
class PdfField {
 public:
  static constexpr std::size_t Q = S::Q;

  explicit PdfField(GridDims dims)
      : layout_{dims, S::D},
        a_(Q * layout_.cells(), 0.0),
        b_(Q * layout_.cells(), 0.0) {}

  [[nodiscard]] const PaddedLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] const GridDims& dims() const noexcept { return layout_.interior; }
  [[nodiscard]] std::size_t stride() const noexcept { return layout_.cells(); }

  [[nodiscard]] std::span<double> src() noexcept { return flipped_ ? std::span<double>(b_) : std::span<double>(a_); }
  [[nodiscard]] std::span<const double> src() const noexcept {
    return flipped_ ? std::span<const double>(b_) : std::span<const double>(a_);
  }
  [[nodiscard]] std::span<double> dst() noexcept { return flipped_ ? std::span<double>(a_) : std::span<double>(b_); }

  void swap() noexcept { flipped_ = !flipped_; }

  /// Current-state PDF of direction i at interior cell (x,y,z).
  [[nodiscard]] double get(std::size_t i, std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return src()[i * stride() + layout_.index(x, y, z)];
  }
  void set(std::size_t i, std::size_t x, std::size_t y, std::size_t z, double v) noexcept {
    src()[i * stride() + layout_.index(x, y, z)] = v;
  }

  [[nodiscard]] std::array<double, Q> cell(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    std::array<double, Q> f{};
    const std::size_t p = layout_.index(x, y, z);
    for (std::size_t i = 0; i < Q; ++i) f[i] = src()[i * stride() + p];
    return f;
  }
  void set_cell(std::size_t x, std::size_t y, std::size_t z, const std::array<double, Q>& f) noexcept {
    const std::size_t p = layout_.index(x, y, z);
    for (std::size_t i = 0; i < Q; ++i) src()[i * stride() + p] = f[i];
  }

  /// First interior cell holding a non-finite PDF, if any.
  [[nodiscard]] std::optional<std::array<std::size_t, 3>> find_non_finite() const noexcept {
    const auto& d = dims();
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const std::size_t p = layout_.index(x, y, z);
          for (std::size_t i = 0; i < Q; ++i)
            if (!std::isfinite(src()[i * stride() + p])) return std::array<std::size_t, 3>{x, y, z};
        }
    return std::nullopt;
  }

 private:
  PaddedLayout layout_;
  std::vector<double> a_, b_;
  bool flipped_ = false;
};

}  // namespace psm
