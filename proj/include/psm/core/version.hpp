#pragma once

namespace psm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace psm
