#pragma once

namespace nedyn {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace nedyn
