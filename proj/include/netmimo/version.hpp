#pragma once

namespace netmimo {

inline constexpr const char* kToolName = "netmimo";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace netmimo
