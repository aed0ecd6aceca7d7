#pragma once

namespace moser {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace moser
