#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "loschmidt/error.hpp"

namespace loschmidt {

/// Time samples in normalized units t~ = t * A_mean, starting at 0.
class TimeGrid {
 public:
  static TimeGrid uniform(double t_max, std::size_t n_points) {
    require(std::isfinite(t_max) && t_max > 0.0, "grid t_max must be > 0");
    require(n_points >= 2, "grid needs at least 2 points");
    std::vector<double> t(n_points);
    const double dt = t_max / static_cast<double>(n_points - 1);
    for (std::size_t k = 0; k < n_points; ++k) t[k] = static_cast<double>(k) * dt;
    t.back() = t_max;
    return TimeGrid(std::move(t), dt);
  }

  /// Arbitrary strictly increasing samples starting at 0 (e.g. read from CSV).
  static TimeGrid from_samples(std::vector<double> t) {
    require(t.size() >= 2, "grid needs at least 2 points");
    require(t.front() == 0.0, "grid must start at t = 0");
    for (std::size_t k = 1; k < t.size(); ++k)
      require(t[k] > t[k - 1], "grid samples must be strictly increasing");
    const double dt = t.back() / static_cast<double>(t.size() - 1);
    bool uniform = true;
    for (std::size_t k = 1; k < t.size() && uniform; ++k)
      uniform = std::abs((t[k] - t[k - 1]) - dt) <= 1e-9 * dt;
    return TimeGrid(std::move(t), uniform ? dt : 0.0);
  }

  const std::vector<double>& samples() const noexcept { return t_; }
  std::size_t size() const noexcept { return t_.size(); }
  double operator[](std::size_t k) const { return t_[k]; }
  double t_max() const noexcept { return t_.back(); }
  bool is_uniform() const noexcept { return step_ > 0.0; }

  /// Spacing of a uniform grid; throws otherwise.
  double step() const {
    require(is_uniform(), "grid is not uniform");
    return step_;
  }

 private:
  TimeGrid(std::vector<double> t, double step) : t_(std::move(t)), step_(step) {}

  std::vector<double> t_;
  double step_;
};

/// M(t~) = |L(t~)|^2 on a grid. log_m keeps the natural log of M where M
/// itself underflows; l is filled only when requested.
struct EchoSeries {
  TimeGrid grid;
  std::vector<double> m;
  std::vector<double> log_m;
  std::vector<std::complex<double>> l;
};

// ---------------------------------------------------------------------------
// Shape measurements
// ---------------------------------------------------------------------------

namespace detail {

inline double crossing(double t0, double m0, double t1, double m1, double level) {
  if (m0 == m1) return t0;
  return t0 + (m0 - level) / (m0 - m1) * (t1 - t0);
}

}  // namespace detail

/// Smallest t~ with M(t~) <= 1/2, linearly interpolated.
inline double first_decay_halfwidth(const EchoSeries& series) {
  const auto& t = series.grid.samples();
  const auto& m = series.m;
  require(!m.empty() && m.front() > 0.5, "series must start above M = 1/2",
          ErrorKind::Numerical);
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (m[k] <= 0.5) return detail::crossing(t[k - 1], m[k - 1], t[k], m[k], 0.5);
  }
  fail(ErrorKind::Numerical, "M never falls to 1/2 within the grid");
}

struct RevivalPeak {
  std::size_t index = 0;
  double t = 0.0;
  double m = 0.0;
};

/// Largest M on samples with t_lo <= t~ <= t_hi.
inline RevivalPeak revival_peak(const EchoSeries& series, double t_lo, double t_hi) {
  const auto& t = series.grid.samples();
  RevivalPeak best;
  bool found = false;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!found || series.m[k] > best.m) best = {k, t[k], series.m[k]};
    found = true;
  }
  require(found, "no samples inside the revival window", ErrorKind::Numerical);
  return best;
}

/// Half-width at half maximum of the revival peaking in [t_lo, t_hi]. For a
/// peak at the first sample (the initial decay) only the falling side exists.
inline double revival_halfwidth(const EchoSeries& series, double t_lo, double t_hi) {
  const auto peak = revival_peak(series, t_lo, t_hi);
  const auto& t = series.grid.samples();
  const auto& m = series.m;
  const double level = 0.5 * peak.m;

  std::size_t k = peak.index;
  while (k + 1 < m.size() && m[k + 1] > level) ++k;
  require(k + 1 < m.size(), "revival does not fall to half maximum on the right",
          ErrorKind::Numerical);
  const double right = detail::crossing(t[k], m[k], t[k + 1], m[k + 1], level);
  if (peak.index == 0) return right - t[0];

  k = peak.index;
  while (k > 0 && m[k - 1] > level) --k;
  require(k > 0, "revival does not fall to half maximum on the left", ErrorKind::Numerical);
  const double left = detail::crossing(t[k], m[k], t[k - 1], m[k - 1], level);
  return 0.5 * (right - left);
}

}  // namespace loschmidt
