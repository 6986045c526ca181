#pragma once

namespace asymcast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace asymcast
