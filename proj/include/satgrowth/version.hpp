#pragma once

namespace satgrowth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace satgrowth
