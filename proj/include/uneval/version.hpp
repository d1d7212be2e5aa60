#pragma once

namespace uneval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uneval
