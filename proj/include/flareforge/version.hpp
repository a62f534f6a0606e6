#pragma once

namespace flareforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flareforge
