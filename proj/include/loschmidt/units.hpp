#pragma once

#include <numbers>

namespace loschmidt::units {

/// E = h f: 1 micro-eV corresponds to 241.799 MHz.
inline constexpr double kMhzPerMicroEv = 241.799;

inline constexpr double micro_ev_to_mhz(double e) { return e * kMhzPerMicroEv; }
inline constexpr double mhz_to_micro_ev(double f) { return f / kMhzPerMicroEv; }

/// Normalized time t~ = t * A_mean -> microseconds when A_mean is in MHz.
inline constexpr double normalized_to_us(double t_norm, double a_mean_mhz) {
  return t_norm / a_mean_mhz;
}

/// Normalized frequency f~ = f / A_mean -> MHz.
inline constexpr double normalized_to_mhz(double f_norm, double a_mean_mhz) {
  return f_norm * a_mean_mhz;
}

inline constexpr double kPi = std::numbers::pi;

}  // namespace loschmidt::units
