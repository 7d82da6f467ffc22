#pragma once

namespace biaslens {

inline constexpr const char* kToolName = "biaslens";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace biaslens
