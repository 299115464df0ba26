#pragma once

// Phenomenological echo law
//   M(t~) ~ exp[-N I (alpha_p sin^2 t~ + beta_p sigma^2 t~^2)]
// and the sqrt(I) time-collapse of echo families.
//
// In log space the law is linear in (alpha_p, beta_p), so the fit is an
// ordinary least-squares problem on y = -ln M / (N I) with regressors
// sin^2 t~ and sigma^2 t~^2, constrained to alpha_p, beta_p >= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "loschmidt/echo.hpp"
#include "loschmidt/error.hpp"
#include "loschmidt/spin_algebra.hpp"

namespace loschmidt {

struct FitOptions {
  double mask = 1e-12;           // samples with M <= mask are ignored
  std::size_t min_samples = 100;
};

struct FitResult {
  double alpha_p = 0.0;
  double beta_p = 0.0;
  double sigma2 = 0.0;
  double residual = 0.0;  // RMS misfit of log10 M over the used samples
  bool converged = false;
  bool degenerate = false;  // sigma^2 t^2 regressor vanished; beta_p fixed at 0
  std::size_t samples_used = 0;
};

/// Model value of ln M.
inline double phenomenological_log_m(double t, std::size_t n, SpinLength spin, double sigma2,
                                     double alpha_p, double beta_p) {
  const double s = std::sin(t);
  return -static_cast<double>(n) * spin.value() * (alpha_p * s * s + beta_p * sigma2 * t * t);
}

inline FitResult fit_phenomenological(const EchoSeries& series, std::size_t n, SpinLength spin,
                                      double sigma2, const FitOptions& opts = {}) {
  require(n >= 1, "bath size must be >= 1");
  require(sigma2 >= 0.0 && std::isfinite(sigma2), "sigma^2 must be finite and >= 0");
  const double log_mask = std::log(opts.mask);
  const double ni = static_cast<double>(n) * spin.value();
  const auto& t = series.grid.samples();

  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (series.log_m[k] > log_mask) {
      ts.push_back(t[k]);
      ys.push_back(-series.log_m[k] / ni);
    }
  }
  require(ts.size() >= opts.min_samples, "too few samples above the fit mask",
          ErrorKind::Numerical);

  const auto rows = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd x(rows, 2);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double s = std::sin(ts[r]);
    x(r, 0) = s * s;
    x(r, 1) = sigma2 * ts[r] * ts[r];
    y(r) = ys[r];
  }

  FitResult res;
  res.sigma2 = sigma2;
  res.samples_used = ts.size();

  auto sse = [&](double a, double b) { return (x.col(0) * a + x.col(1) * b - y).squaredNorm(); };
  auto single = [&](Eigen::Index col) {
    const double denom = x.col(col).squaredNorm();
    return denom > 0.0 ? std::max(0.0, x.col(col).dot(y) / denom) : 0.0;
  };

  if (x.col(1).cwiseAbs().maxCoeff() <= std::numeric_limits<double>::min()) {
    res.degenerate = true;
    res.alpha_p = single(0);
    res.beta_p = 0.0;
  } else {
    const Eigen::Vector2d sol = x.colPivHouseholderQr().solve(y);
    if (sol(0) >= 0.0 && sol(1) >= 0.0) {
      res.alpha_p = sol(0);
      res.beta_p = sol(1);
    } else {
      // Active constraint: the optimum lies on one of the two axes.
      const double a_only = single(0);
      const double b_only = single(1);
      if (sse(a_only, 0.0) <= sse(0.0, b_only)) {
        res.alpha_p = a_only;
      } else {
        res.beta_p = b_only;
      }
    }
  }
  res.converged = std::isfinite(res.alpha_p) && std::isfinite(res.beta_p);
  // y is ln M scaled by -1/(N I); convert the misfit back to log10 M.
  res.residual = std::sqrt(sse(res.alpha_p, res.beta_p) / static_cast<double>(rows)) * ni /
                 std::numbers::ln10;
  return res;
}

// ---------------------------------------------------------------------------
// Time collapse
// ---------------------------------------------------------------------------

struct CollapseRun {
  EchoSeries series;
  SpinLength spin;
  std::size_t n;
};

struct CollapseOptions {
  bool scale_by_sqrt_i = true;
  double floor = 1e-3;  // the first decay ends where M first drops below this
  std::size_t samples = 512;
};

namespace detail {

inline double interpolate(const EchoSeries& s, double t) {
  const auto& ts = s.grid.samples();
  if (t <= ts.front()) return s.m.front();
  if (t >= ts.back()) return s.m.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const auto k = static_cast<std::size_t>(it - ts.begin());
  const double f = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return s.m[k - 1] + f * (s.m[k] - s.m[k - 1]);
}

}  // namespace detail

/// Max pairwise |M_a - M_b| over the first decay after rescaling each run's
/// time axis to t~ sqrt(I).
inline double collapse_error(const std::vector<CollapseRun>& runs, const CollapseOptions& opts = {}) {
  require(runs.size() >= 2, "collapse needs at least two runs");
  for (const auto& r : runs) require(r.n == runs.front().n, "collapse runs must share N");

  auto scale = [&](const CollapseRun& r) {
    return opts.scale_by_sqrt_i ? std::sqrt(r.spin.value()) : 1.0;
  };
  double window = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    const auto& t = r.series.grid.samples();
    double end = t.back();
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (r.series.m[k] < opts.floor) {
        end = t[k];
        break;
      }
    }
    window = std::min(window, end * scale(r));
  }

  double worst = 0.0;
  for (std::size_t p = 0; p < opts.samples; ++p) {
    const double tau = window * static_cast<double>(p) / static_cast<double>(opts.samples - 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : runs) {
      const double m = detail::interpolate(r.series, tau / scale(r));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

}  // namespace loschmidt
