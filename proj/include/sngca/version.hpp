#pragma once

namespace sngca {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sngca
