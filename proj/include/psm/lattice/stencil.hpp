#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace psm {

/// Discrete velocity sets. Each stencil exposes `D`, `Q`, integer
/// velocities `c`, weights `w`, the opposite-direction table and `cs2`.

struct D2Q9 {
  static constexpr std::string_view name = "D2Q9";
  static constexpr int D = 2;
  static constexpr std::size_t Q = 9;
  static constexpr double cs2 = 1.0 / 3.0;
  static constexpr std::array<std::array<int, 3>, Q> c{{
      {0, 0, 0},
      {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0},
      {1, 1, 0}, {-1, -1, 0}, {-1, 1, 0}, {1, -1, 0},
  }};
  static constexpr std::array<double, Q> w{
      4.0 / 9.0,
      1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0,
      1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
  };
  static constexpr std::array<std::size_t, Q> opposite{0, 2, 1, 4, 3, 6, 5, 8, 7};
};

struct D3Q19 {
  static constexpr std::string_view name = "D3Q19";
  static constexpr int D = 3;
  static constexpr std::size_t Q = 19;
  static constexpr double cs2 = 1.0 / 3.0;
  static constexpr std::array<std::array<int, 3>, Q> c{{
      {0, 0, 0},
      {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
      {1, 1, 0}, {-1, -1, 0}, {1, -1, 0}, {-1, 1, 0},
      {1, 0, 1}, {-1, 0, -1}, {1, 0, -1}, {-1, 0, 1},
      {0, 1, 1}, {0, -1, -1}, {0, 1, -1}, {0, -1, 1},
  }};
  static constexpr std::array<double, Q> w{
      1.0 / 3.0,
      1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
      1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
      1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
      1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
  };
  static constexpr std::array<std::size_t, Q> opposite{0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17};
};

template <typename S>
concept Stencil = requires {
  { S::D } -> std::convertible_to<int>;
  { S::Q } -> std::convertible_to<std::size_t>;
  S::c;
  S::w;
  S::opposite;
  { S::cs2 } -> std::convertible_to<double>;
};

}  // namespace psm
