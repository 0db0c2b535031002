#pragma once

namespace fovholo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fovholo
