#pragma once

namespace stagekin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stagekin
