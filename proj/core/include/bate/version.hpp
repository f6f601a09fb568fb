#pragma once

namespace bate {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bate
