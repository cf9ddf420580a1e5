#pragma once

namespace asap {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kVersionString = "asap-phi 0.1.0";

} // namespace asap
