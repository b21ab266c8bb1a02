#pragma once

namespace locq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace locq
