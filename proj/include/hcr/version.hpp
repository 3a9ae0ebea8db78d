#pragma once

namespace hcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hcr
