#pragma once

// Loschmidt echo of a separable bath.
//
// Both qubit-conditioned Hamiltonians are sums of one-site terms, so
// L(t) = prod_i <Omega_i| e^{+i h_i^- t} e^{-i h_i^+ t} |Omega_i>. Every site
// contributes one complex factor per time sample; the factors are multiplied
// in site order into a scaled accumulator that keeps a separate binary
// exponent, so deep troughs between revivals never flush to zero.
//
// Time is normalized, t~ = t * A_mean, and all couplings enter as ratios to
// A_mean. Work is tiled into fixed blocks of consecutive time samples; each
// block is owned by one worker, which makes the output independent of the
// thread count bit for bit.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "loschmidt/bath.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/parallel.hpp"
#include "loschmidt/spin_algebra.hpp"

namespace loschmidt {

struct EngineOptions {
  unsigned threads = 0;  // 0: all hardware threads
  bool keep_l = false;   // also return the complex L(t~)
};

/// Complex number carried as mantissa * 2^exponent.
class ScaledComplex {
 public:
  void multiply(Complex z) {
    mantissa_ *= z;
    const double big = std::max(std::abs(mantissa_.real()), std::abs(mantissa_.imag()));
    if (big == 0.0) return;
    if (big < 0x1.0p-256 || big > 0x1.0p256) {
      int e = 0;
      std::frexp(big, &e);
      mantissa_ = {std::ldexp(mantissa_.real(), -e), std::ldexp(mantissa_.imag(), -e)};
      exponent_ += e;
    }
  }

  double norm() const { return std::ldexp(std::norm(mantissa_), 2 * static_cast<int>(exponent_)); }

  double log_norm() const {
    const double n = std::norm(mantissa_);
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(n) + 2.0 * static_cast<double>(exponent_) * std::numbers::ln2;
  }

  Complex value() const {
    const int e = static_cast<int>(exponent_);
    return {std::ldexp(mantissa_.real(), e), std::ldexp(mantissa_.imag(), e)};
  }

 private:
  Complex mantissa_{1.0, 0.0};
  long exponent_ = 0;
};

// ---------------------------------------------------------------------------
// One-site Hamiltonians and evolutions
// ---------------------------------------------------------------------------

struct SiteHamiltonians {
  Eigen::MatrixXd h_plus;
  Eigen::MatrixXd h_minus;
};

/// h_+- = (f_q/6)[3 Iz^2 + (eta/2)(I+^2 + I-^2)] +- a Iz, with the constant
/// I^2 term dropped. Couplings are used as given; scale them beforehand.
inline SiteHamiltonians site_hamiltonians(const Site& site, SpinLength spin) {
  const auto ops = spin_matrices(spin);
  const Eigen::MatrixXd quad =
      (site.f_q / 6.0) * (3.0 * ops.iz * ops.iz +
                          0.5 * site.eta * (ops.iplus * ops.iplus + ops.iminus * ops.iminus));
  return {quad + site.a * ops.iz, quad - site.a * ops.iz};
}

/// Precomputed spectral data of one site:
/// L_i(t) = sum_jk conj(beta_j) e^{+i lm_j t} C_jk e^{-i lp_k t} alpha_k.
struct SiteEvolution {
  Eigen::VectorXd lambda_plus;
  Eigen::VectorXd lambda_minus;
  Eigen::VectorXcd alpha;      // V+^T |Omega>
  Eigen::VectorXcd beta_conj;  // conj(V-^T |Omega>)
  Eigen::MatrixXd overlap;     // V-^T V+

  /// `scale` divides every coupling (normally the bath's A_mean).
  static SiteEvolution make(const Site& site, SpinLength spin, double scale) {
    Site scaled = site;
    scaled.a /= scale;
    scaled.f_q /= scale;
    const auto h = site_hamiltonians(scaled, spin);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> plus(h.h_plus);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> minus(h.h_minus);
    require(plus.info() == Eigen::Success && minus.info() == Eigen::Success,
            "site eigendecomposition failed", ErrorKind::Numerical);
    const auto omega = coherent_state(spin, site.theta, site.phi).amplitudes;
    SiteEvolution ev;
    ev.lambda_plus = plus.eigenvalues();
    ev.lambda_minus = minus.eigenvalues();
    ev.alpha = plus.eigenvectors().transpose().cast<Complex>() * omega;
    ev.beta_conj = (minus.eigenvectors().transpose().cast<Complex>() * omega).conjugate();
    ev.overlap = minus.eigenvectors().transpose() * plus.eigenvectors();
    return ev;
  }

  Complex factor(double t) const {
    const Eigen::Index d = alpha.size();
    Eigen::VectorXcd u(d);
    for (Eigen::Index k = 0; k < d; ++k) u(k) = alpha(k) * std::polar(1.0, -lambda_plus(k) * t);
    const Eigen::VectorXcd w = overlap.cast<Complex>() * u;
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      acc += beta_conj(j) * std::polar(1.0, lambda_minus(j) * t) * w(j);
    return acc;
  }
};

/// <Omega| e^{+i h^- t} e^{-i h^+ t} |Omega> for one site, time in units of 1/scale.
inline Complex site_echo_factor(const Site& site, SpinLength spin, double t, double scale = 1.0) {
  return SiteEvolution::make(site, spin, scale).factor(t);
}

namespace detail {

inline constexpr std::size_t kTimeBlock = 64;

// Unit phases e^{-i w t_k} over one block: exact at the block start, then a
// fixed-step recurrence on uniform grids (drift stays at a few ulp per block).
class PhaseRun {
 public:
  PhaseRun(double omega, const TimeGrid& grid, std::size_t k0)
      : omega_(omega), grid_(grid), k_(k0), value_(std::polar(1.0, -omega * grid[k0])) {
    if (grid.is_uniform()) step_ = std::polar(1.0, -omega * grid.step());
  }

  Complex value() const { return value_; }

  void advance() {
    ++k_;
    if (grid_.is_uniform()) {
      value_ *= step_;
    } else if (k_ < grid_.size()) {
      value_ = std::polar(1.0, -omega_ * grid_[k_]);
    }
  }

 private:
  double omega_;
  const TimeGrid& grid_;
  std::size_t k_;
  Complex value_;
  Complex step_{1.0, 0.0};
};

// Drives a per-site block kernel and assembles the series. The kernel has the
// signature kernel(site_index, k0, k1, Complex* out) and writes L_i(t_k) for
// k in [k0, k1).
template <typename Kernel>
EchoSeries accumulate(std::size_t n_sites, const TimeGrid& grid, const EngineOptions& opts,
                      Kernel&& kernel) {
  const std::size_t n_t = grid.size();
  EchoSeries out{grid, std::vector<double>(n_t), std::vector<double>(n_t), {}};
  if (opts.keep_l) out.l.resize(n_t);
  const std::size_t n_blocks = (n_t + kTimeBlock - 1) / kTimeBlock;
  parallel_for_blocks(n_blocks, opts.threads, [&](std::size_t b) {
    const std::size_t k0 = b * kTimeBlock;
    const std::size_t k1 = std::min(n_t, k0 + kTimeBlock);
    std::vector<ScaledComplex> acc(k1 - k0);
    std::vector<Complex> factors(k1 - k0);
    for (std::size_t i = 0; i < n_sites; ++i) {
      kernel(i, k0, k1, factors.data());
      for (std::size_t k = k0; k < k1; ++k) acc[k - k0].multiply(factors[k - k0]);
    }
    for (std::size_t k = k0; k < k1; ++k) {
      out.m[k] = acc[k - k0].norm();
      out.log_m[k] = acc[k - k0].log_norm();
      if (opts.keep_l) out.l[k] = acc[k - k0].value();
    }
  });
  return out;
}

}  // namespace detail

/// Hyperfine-only echo: L(t~) = prod_i sum_m W_i^m e^{-i 2 a_i m t~},
/// a_i = A_i / A_mean. Quadrupolar parameters are ignored.
inline EchoSeries le_hf(const Bath& bath, const TimeGrid& grid, const EngineOptions& opts = {}) {
  const SpinLength spin = bath.spin();
  const int d = spin.dim();
  const int two_i = spin.two_i();
  const double scale = bath.a_mean();
  std::vector<Eigen::VectorXd> w;
  std::vector<double> a;
  w.reserve(bath.size());
  a.reserve(bath.size());
  for (const auto& s : bath.sites()) {
    w.push_back(weights(spin, s.theta));
    a.push_back(s.a / scale);
  }
  return detail::accumulate(bath.size(), grid, opts,
                            [&](std::size_t i, std::size_t k0, std::size_t k1, Complex* out) {
    // With q = e^{-i a t}: e^{-i 2 a m t} = q^{2I} (conj(q)^2)^k for m = I - k.
    detail::PhaseRun q(a[i], grid, k0);
    const Eigen::VectorXd& wi = w[i];
    for (std::size_t k = k0; k < k1; ++k, q.advance()) {
      const Complex qv = q.value();
      const Complex z = std::conj(qv) * std::conj(qv);
      Complex horner = wi(d - 1);
      for (int j = d - 2; j >= 0; --j) horner = horner * z + wi(j);
      Complex pre = 1.0;
      for (int p = 0; p < two_i; ++p) pre *= qv;
      out[k - k0] = pre * horner;
    }
  });
}

/// Echo with hyperfine and quadrupolar terms; each site is diagonalized once
/// and its two propagators are applied through the eigenbases.
inline EchoSeries le_full(const Bath& bath, const TimeGrid& grid, const EngineOptions& opts = {}) {
  const SpinLength spin = bath.spin();
  const Eigen::Index d = spin.dim();
  std::vector<SiteEvolution> evo;
  evo.reserve(bath.size());
  for (const auto& s : bath.sites()) evo.push_back(SiteEvolution::make(s, spin, bath.a_mean()));

  return detail::accumulate(bath.size(), grid, opts,
                            [&](std::size_t i, std::size_t k0, std::size_t k1, Complex* out) {
    const SiteEvolution& ev = evo[i];
    std::vector<detail::PhaseRun> plus;
    std::vector<detail::PhaseRun> minus;
    plus.reserve(d);
    minus.reserve(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      plus.emplace_back(ev.lambda_plus(j), grid, k0);
      minus.emplace_back(-ev.lambda_minus(j), grid, k0);
    }
    Eigen::VectorXcd u(d);
    for (std::size_t k = k0; k < k1; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        u(j) = ev.alpha(j) * plus[j].value();
        plus[j].advance();
      }
      Complex acc = 0.0;
      for (Eigen::Index r = 0; r < d; ++r) {
        Complex row = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) row += ev.overlap(r, c) * u(c);
        acc += ev.beta_conj(r) * minus[r].value() * row;
        minus[r].advance();
      }
      out[k - k0] = acc;
    }
  });
}

/// le_full when any site has an active quadrupole term, le_hf otherwise.
inline EchoSeries loschmidt_echo(const Bath& bath, const TimeGrid& grid,
                                 const EngineOptions& opts = {}) {
  return bath.has_quadrupole() ? le_full(bath, grid, opts) : le_hf(bath, grid, opts);
}

}  // namespace loschmidt
