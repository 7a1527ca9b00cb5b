#pragma once

namespace stabest {

inline constexpr const char* kToolName = "stabest";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace stabest
