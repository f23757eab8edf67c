#pragma once

namespace coalesce {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coalesce
