#pragma once

namespace oamx {

inline constexpr const char* kToolkitName = "oamx";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace oamx
