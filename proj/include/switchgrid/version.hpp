#pragma once

namespace switchgrid {

inline constexpr const char* kToolName = "switchgrid";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace switchgrid
