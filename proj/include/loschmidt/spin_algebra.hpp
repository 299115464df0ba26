#pragma once

// Finite-dimensional spin-I operators and coherent spin states.
//
// Basis ordering is fixed everywhere in this library: index k = 0 .. 2I maps
// to magnetic quantum number m = I - k, i.e. |I>, |I-1>, ..., |-I>.
// Half-integer quantities are carried as "twice" integers (two_i = 2I,
// two_m = 2m) so that no floating point ever decides which level is which.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "loschmidt/error.hpp"

namespace loschmidt {

using Complex = std::complex<double>;

class SpinLength {
 public:
  static constexpr int kMaxTwoI = 255;

  explicit SpinLength(int two_i) : two_i_(two_i) {
    require(two_i >= 1 && two_i <= kMaxTwoI,
            "spin length 2I must lie in [1, 255], got " + std::to_string(two_i));
  }

  static SpinLength half() { return SpinLength(1); }

  int two_i() const noexcept { return two_i_; }
  int dim() const noexcept { return two_i_ + 1; }
  double value() const noexcept { return 0.5 * two_i_; }

  /// 2m of basis index k.
  int two_m(int k) const noexcept { return two_i_ - 2 * k; }
  double m(int k) const noexcept { return 0.5 * two_m(k); }

  /// Basis index of 2m; throws if 2m is not a level of this spin.
  int index_of(int two_m) const {
    require(two_m >= -two_i_ && two_m <= two_i_ && ((two_i_ - two_m) % 2 == 0),
            "2m = " + std::to_string(two_m) + " is not a level of spin 2I = " +
                std::to_string(two_i_));
    return (two_i_ - two_m) / 2;
  }

  friend bool operator==(SpinLength, SpinLength) = default;

  std::string to_string() const {
    return two_i_ % 2 == 0 ? std::to_string(two_i_ / 2)
                           : std::to_string(two_i_) + "/2";
  }

 private:
  int two_i_;
};

struct SpinMatrices {
  Eigen::MatrixXd iz;
  Eigen::MatrixXd iplus;
  Eigen::MatrixXd iminus;
};

inline SpinMatrices spin_matrices(SpinLength spin) {
  const int d = spin.dim();
  const double s = spin.value();
  SpinMatrices out{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                   Eigen::MatrixXd::Zero(d, d)};
  for (int k = 0; k < d; ++k) out.iz(k, k) = spin.m(k);
  // I+ |m> = sqrt(I(I+1) - m(m+1)) |m+1>; |m+1> sits one index above |m>.
  for (int k = 1; k < d; ++k) {
    const double m = spin.m(k);
    out.iplus(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  out.iminus = out.iplus.transpose();
  return out;
}

/// ln C(n, k), evaluated through lgamma.
inline double log_binomial(int n, int k) {
  require(k >= 0 && k <= n, "binomial index out of range");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial(int n, int k) { return std::exp(log_binomial(n, k)); }

namespace detail {

// x^p for integer p >= 0 with 0^0 = 1.
inline double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace detail

struct CoherentState {
  double theta = 0.0;
  double phi = 0.0;
  Eigen::VectorXcd amplitudes;
};

/// Coherent spin state |theta, phi> expanded in the Iz basis:
/// <m|Omega> = sqrt(C(2I, I+m)) cos(theta/2)^(I+m) sin(theta/2)^(I-m) e^{-i(I-m)phi}.
inline CoherentState coherent_state(SpinLength spin, double theta, double phi) {
  require(std::isfinite(theta) && std::isfinite(phi),
          "coherent state angles must be finite");
  const int d = spin.dim();
  const int n = spin.two_i();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  CoherentState out{theta, phi, Eigen::VectorXcd(d)};
  for (int k = 0; k < d; ++k) {
    // I + m = 2I - k, I - m = k.
    const int up = n - k;
    const double mag = std::exp(0.5 * log_binomial(n, up)) * detail::ipow(c, up) *
                       detail::ipow(s, k);
    out.amplitudes(k) = std::polar(mag, -static_cast<double>(k) * phi);
  }
  return out;
}

/// |<m|Omega>|^2 for the coherent state at polar angle theta; independent of phi.
inline double weight(SpinLength spin, int two_m, double theta) {
  const int k = spin.index_of(two_m);
  const int n = spin.two_i();
  const double c2 = std::cos(0.5 * theta) * std::cos(0.5 * theta);
  const double s2 = std::sin(0.5 * theta) * std::sin(0.5 * theta);
  return std::exp(log_binomial(n, n - k)) * detail::ipow(c2, n - k) *
         detail::ipow(s2, k);
}

/// All weights in basis order (m = I, ..., -I).
inline Eigen::VectorXd weights(SpinLength spin, double theta) {
  Eigen::VectorXd w(spin.dim());
  for (int k = 0; k < spin.dim(); ++k) w(k) = weight(spin, spin.two_m(k), theta);
  return w;
}

}  // namespace loschmidt
