#pragma once

namespace perturbench {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace perturbench
