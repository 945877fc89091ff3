#pragma once

namespace omchaos {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace omchaos
