#pragma once

// Brute-force reference: evolve the full (2I+1)^N bath state under both
// qubit-conditioned Hamiltonians and take the overlap directly. Used to check
// the engine; deliberately built from spin_matrices() and coherent_state()
// only, without the engine's per-site machinery.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "loschmidt/bath.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/engine.hpp"
#include "loschmidt/spin_algebra.hpp"

namespace loschmidt {

inline constexpr std::size_t kOracleMaxDim = 4096;

struct FullState {
  std::size_t dim = 0;
  Eigen::VectorXcd amplitudes;
};

namespace detail {

inline std::size_t checked_oracle_dim(const Bath& bath) {
  const std::size_t dim = bath.full_dimension(kOracleMaxDim);
  require(dim <= kOracleMaxDim,
          "oracle dimension (2I+1)^N exceeds " + std::to_string(kOracleMaxDim),
          ErrorKind::OracleGuard);
  return dim;
}

// I (x) ... (x) op (x) ... (x) I with `op` on `site`; site 0 is the most
// significant tensor factor.
inline Eigen::MatrixXd embed(const Eigen::MatrixXd& op, std::size_t site, std::size_t n_sites) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (std::size_t s = 0; s < n_sites; ++s) {
    const Eigen::MatrixXd factor =
        s == site ? op : Eigen::MatrixXd::Identity(op.rows(), op.cols());
    Eigen::MatrixXd next(out.rows() * factor.rows(), out.cols() * factor.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        next.block(r * factor.rows(), c * factor.cols(), factor.rows(), factor.cols()) =
            out(r, c) * factor;
    out = std::move(next);
  }
  return out;
}

struct BranchSystem {
  Eigen::VectorXd lambda_plus;
  Eigen::MatrixXd v_plus;
  Eigen::VectorXd lambda_minus;
  Eigen::MatrixXd v_minus;
  Eigen::VectorXcd b0;
};

inline BranchSystem diagonalize_branches(const Bath& bath) {
  const std::size_t dim = checked_oracle_dim(bath);
  const std::size_t n = bath.size();
  const SpinLength spin = bath.spin();
  const auto ops = spin_matrices(spin);
  const double scale = bath.a_mean();

  Eigen::MatrixXd h_plus = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd h_minus = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXcd b0 = Eigen::VectorXcd::Ones(1);
  for (std::size_t i = 0; i < n; ++i) {
    const Site& s = bath.sites()[i];
    const double a = s.a / scale;
    const double fq = s.f_q / scale;
    const Eigen::MatrixXd iz2 = ops.iz * ops.iz;
    const Eigen::MatrixXd ip2 = ops.iplus * ops.iplus;
    const Eigen::MatrixXd im2 = ops.iminus * ops.iminus;
    const Eigen::MatrixXd quad = fq / 6.0 * (3.0 * iz2 + s.eta / 2.0 * (ip2 + im2));
    const Eigen::MatrixXd hf = a * ops.iz;
    h_plus += embed(quad + hf, i, n);
    h_minus += embed(quad - hf, i, n);

    const Eigen::VectorXcd omega = coherent_state(spin, s.theta, s.phi).amplitudes;
    Eigen::VectorXcd next(b0.size() * omega.size());
    for (Eigen::Index r = 0; r < b0.size(); ++r)
      next.segment(r * omega.size(), omega.size()) = b0(r) * omega;
    b0 = std::move(next);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> plus(h_plus);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> minus(h_minus);
  require(plus.info() == Eigen::Success && minus.info() == Eigen::Success,
          "oracle eigendecomposition failed", ErrorKind::Numerical);
  return {plus.eigenvalues(), plus.eigenvectors(), minus.eigenvalues(), minus.eigenvectors(),
          std::move(b0)};
}

inline Eigen::VectorXcd propagate(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& v,
                                  const Eigen::VectorXcd& state, double t) {
  Eigen::VectorXcd coeff = v.transpose().cast<Complex>() * state;
  for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::polar(1.0, -lambda(k) * t);
  return v.cast<Complex>() * coeff;
}

}  // namespace detail

/// |B+(t~)> and |B-(t~)>, evolved from the product of coherent states.
inline std::pair<FullState, FullState> evolve_branches(const Bath& bath, double t) {
  const auto sys = detail::diagonalize_branches(bath);
  const auto dim = static_cast<std::size_t>(sys.b0.size());
  return {FullState{dim, detail::propagate(sys.lambda_plus, sys.v_plus, sys.b0, t)},
          FullState{dim, detail::propagate(sys.lambda_minus, sys.v_minus, sys.b0, t)}};
}

/// M(t~) = |<B-(t~)|B+(t~)>|^2 from full-space evolution.
inline EchoSeries brute_force_le(const Bath& bath, const TimeGrid& grid) {
  const auto sys = detail::diagonalize_branches(bath);
  const Eigen::VectorXcd c_plus = sys.v_plus.transpose().cast<Complex>() * sys.b0;
  const Eigen::VectorXcd c_minus = sys.v_minus.transpose().cast<Complex>() * sys.b0;
  const Eigen::MatrixXcd overlap = (sys.v_minus.transpose() * sys.v_plus).cast<Complex>();
  EchoSeries out{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size()),
                 std::vector<Complex>(grid.size())};
  Eigen::VectorXcd plus(c_plus.size());
  Eigen::VectorXcd minus(c_minus.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (Eigen::Index j = 0; j < plus.size(); ++j) {
      plus(j) = c_plus(j) * std::polar(1.0, -sys.lambda_plus(j) * grid[k]);
      minus(j) = c_minus(j) * std::polar(1.0, -sys.lambda_minus(j) * grid[k]);
    }
    const Complex l = minus.dot(overlap * plus);  // dot() conjugates the left operand
    out.l[k] = l;
    out.m[k] = std::norm(l);
    out.log_m[k] = std::log(out.m[k]);
  }
  return out;
}

/// |<B-|B+>_full - prod_i <Omega_i| e^{+i h_i^- t} e^{-i h_i^+ t} |Omega_i>|.
inline double overlap_factorization_check(const Bath& bath, double t) {
  const auto [plus, minus] = evolve_branches(bath, t);
  const Complex full = minus.amplitudes.dot(plus.amplitudes);
  Complex product = 1.0;
  for (const auto& s : bath.sites()) product *= site_echo_factor(s, bath.spin(), t, bath.a_mean());
  return std::abs(full - product);
}

}  // namespace loschmidt
