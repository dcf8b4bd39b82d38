#pragma once

namespace incdyn {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace incdyn
