#pragma once

#include <numbers>

// Internal units: hbar = 1, angular frequencies in rad/us, times in us.
// Lab-frame frequencies (nu = omega / 2pi) only appear at the I/O boundary.
namespace oqft::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Lab frequency in MHz -> angular frequency in rad/us.
constexpr double from_mhz(double nu_mhz) { return kTwoPi * nu_mhz; }
/// Lab frequency in kHz -> angular frequency in rad/us.
constexpr double from_khz(double nu_khz) { return kTwoPi * nu_khz * 1e-3; }
/// Angular frequency in rad/us -> lab frequency in MHz.
constexpr double to_mhz(double omega) { return omega / kTwoPi; }
constexpr double to_khz(double omega) { return omega / kTwoPi * 1e3; }

}  // namespace oqft::units
