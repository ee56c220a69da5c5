#pragma once

namespace lifsync {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lifsync
