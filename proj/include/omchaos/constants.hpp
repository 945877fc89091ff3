#pragma once

namespace omchaos::constants {

// CODATA 2018 values. Recorded in output metadata so every derived number
// can be reproduced from the file header alone.
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double speed_of_light = 2.99792458e8;    // m/s
inline constexpr double rb87_mass = 1.44316e-25;          // kg
inline constexpr double pi = 3.14159265358979323846;

}  // namespace omchaos::constants
