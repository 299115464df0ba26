#pragma once

// Nuclear spin baths: per-site couplings and initial coherent-state angles.
//
// Synthetic baths spread the hyperfine and quadrupolar couplings uniformly
// around prescribed means and draw initial angles area-uniformly from a
// spherical cap. Realistic baths place nuclei on a simple cubic lattice and
// weight the hyperfine couplings by a Gaussian electron envelope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "loschmidt/error.hpp"
#include "loschmidt/rng.hpp"
#include "loschmidt/spin_algebra.hpp"
#include "loschmidt/units.hpp"

namespace loschmidt {

struct Site {
  double a = 1.0;    // hyperfine coupling
  double f_q = 0.0;  // quadrupolar frequency, same unit as a
  double eta = 0.0;  // field-gradient biaxiality
  double theta = 0.0;
  double phi = 0.0;
};

inline void validate_site(const Site& s) {
  require(std::isfinite(s.a) && s.a > 0.0, "site hyperfine coupling must be > 0");
  require(std::isfinite(s.f_q) && s.f_q >= 0.0, "site quadrupolar frequency must be >= 0");
  require(s.eta >= 0.0 && s.eta <= 1.0, "site biaxiality must lie in [0, 1]");
  require(std::isfinite(s.theta) && std::isfinite(s.phi), "site angles must be finite");
}

/// Homonuclear bath. Immutable once built.
class Bath {
 public:
  Bath(SpinLength spin, std::vector<Site> sites) : spin_(spin), sites_(std::move(sites)) {
    require(!sites_.empty(), "a bath needs at least one site");
    double a_sum = 0.0;
    double fq_sum = 0.0;
    for (const auto& s : sites_) {
      validate_site(s);
      a_sum += s.a;
      fq_sum += s.f_q;
    }
    a_mean_ = a_sum / static_cast<double>(sites_.size());
    fq_mean_ = fq_sum / static_cast<double>(sites_.size());
  }

  SpinLength spin() const noexcept { return spin_; }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  std::size_t size() const noexcept { return sites_.size(); }
  double a_mean() const noexcept { return a_mean_; }
  double fq_mean() const noexcept { return fq_mean_; }

  /// Variance of the couplings in units of a_mean^2.
  double normalized_a_variance() const {
    double acc = 0.0;
    for (const auto& s : sites_) {
      const double d = s.a / a_mean_ - 1.0;
      acc += d * d;
    }
    return acc / static_cast<double>(sites_.size());
  }

  bool has_quadrupole() const {
    return std::any_of(sites_.begin(), sites_.end(),
                       [](const Site& s) { return s.f_q > 0.0 && s.eta > 0.0; });
  }

  /// Hilbert-space dimension (2I+1)^N, saturating at `cap + 1`.
  std::size_t full_dimension(std::size_t cap) const {
    std::size_t dim = 1;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      dim *= static_cast<std::size_t>(spin_.dim());
      if (dim > cap) return cap + 1;
    }
    return dim;
  }

 private:
  SpinLength spin_;
  std::vector<Site> sites_;
  double a_mean_ = 0.0;
  double fq_mean_ = 0.0;
};

struct SamplingConfig {
  std::size_t n = 1;
  double theta_p = units::kPi;  // cone polar angle; pi is the full sphere
  double da_max = 0.0;          // max |A_i - A_mean| / A_mean
  double dfq_max = 0.0;         // max |f_Qi - fQ_mean| / fQ_mean
  double eta = 0.0;
  double fq_mean_ratio = 0.0;   // fQ_mean / A_mean
  std::uint64_t seed = 0;
};

inline void validate(const SamplingConfig& cfg) {
  require(cfg.theta_p > 0.0 && cfg.theta_p <= units::kPi,
          "cone angle theta_p must lie in (0, pi]", ErrorKind::Validation);
  // da_max = 1 is admitted: the open-interval draw keeps every coupling > 0.
  require(cfg.da_max >= 0.0 && cfg.da_max <= 1.0, "da_max must lie in [0, 1]",
          ErrorKind::Validation);
  require(cfg.dfq_max >= 0.0 && cfg.dfq_max < 1.0, "dfq_max must lie in [0, 1)",
          ErrorKind::Validation);
  require(cfg.eta >= 0.0 && cfg.eta <= 1.0, "eta must lie in [0, 1]", ErrorKind::Validation);
  require(std::isfinite(cfg.fq_mean_ratio) && cfg.fq_mean_ratio >= 0.0,
          "fq_mean_ratio must be >= 0", ErrorKind::Validation);
}

namespace detail {

struct Angles {
  double theta;
  double phi;
};

// cos(theta) uniform on [cos(theta_p), 1]: area-uniform over the cap.
inline Angles draw_cap_angles(RandomStream& rng, double theta_p) {
  const double u = rng.uniform_open();
  const double cos_theta = 1.0 - u * (1.0 - std::cos(theta_p));
  const double theta = std::min(std::acos(std::clamp(cos_theta, -1.0, 1.0)), theta_p);
  const double phi = 2.0 * units::kPi * rng.uniform_open();
  return {theta, phi};
}

inline double spread(RandomStream& rng, double mean, double rel) {
  return mean * (1.0 + rel * (2.0 * rng.uniform_open() - 1.0));
}

}  // namespace detail

/// Synthetic bath. Each site consumes exactly four draws (cos theta, phi, A,
/// f_Q) in site order, so runs that differ only in spreads share their angles.
inline Bath sample_bath(const SamplingConfig& cfg, SpinLength spin, double a_mean) {
  validate(cfg);
  require(cfg.n >= 1, "bath size must be >= 1", ErrorKind::Validation);
  require(std::isfinite(a_mean) && a_mean > 0.0, "a_mean must be > 0", ErrorKind::Validation);
  RandomStream rng(cfg.seed);
  const double fq_mean = cfg.fq_mean_ratio * a_mean;
  std::vector<Site> sites;
  sites.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto ang = detail::draw_cap_angles(rng, cfg.theta_p);
    const double a = detail::spread(rng, a_mean, cfg.da_max);
    const double f_q = detail::spread(rng, fq_mean, cfg.dfq_max);
    sites.push_back({a, f_q, cfg.eta, ang.theta, ang.phi});
  }
  return Bath(spin, std::move(sites));
}

// ---------------------------------------------------------------------------
// Realistic geometries
// ---------------------------------------------------------------------------

/// Gaussian envelope amplitude Psi(r) / Psi(0).
inline double envelope(double r, double l0) { return std::exp(-r * r / (2.0 * l0 * l0)); }

/// Radius where envelope() falls to `ratio`.
inline double envelope_cutoff_radius(double l0, double ratio = 1e-3) {
  return l0 * std::sqrt(-2.0 * std::log(ratio));
}

/// Effective number of spins inside a Gaussian envelope of radius l0.
inline double n_eff(double rho, double l0, double v0) {
  return rho * 4.0 * units::kPi * l0 * l0 * l0 / (3.0 * v0);
}

/// Atomic volume that yields `target` effective spins.
inline double v0_for_n_eff(double target, double rho, double l0) {
  return rho * 4.0 * units::kPi * l0 * l0 * l0 / (3.0 * target);
}

/// Disk analogue: Gaussian radius R, uniform height h.
inline double disk_n_eff(double rho, double radius, double height, double v0) {
  return rho * units::kPi * radius * radius * height / v0;
}

inline double disk_v0_for_n_eff(double target, double rho, double radius, double height) {
  return rho * units::kPi * radius * radius * height / target;
}

enum class GeometryKind { Donor, DiskDot };

struct Geometry {
  GeometryKind kind = GeometryKind::Donor;
  double l0_nm = 5.0;        // donor envelope radius
  double radius_nm = 12.5;   // disk radial envelope radius
  double height_nm = 3.0;    // disk height
  double rho = 1.0;          // spinful fraction
  double a_total_uev = 1.0;  // sum of hyperfine couplings
  double lattice_spacing_nm = 0.5;
  double n_eff_override = 0.0;  // > 0 replaces the envelope-volume estimate

  double v0() const { return lattice_spacing_nm * lattice_spacing_nm * lattice_spacing_nm; }

  double target_n_eff() const {
    if (n_eff_override > 0.0) return n_eff_override;
    return kind == GeometryKind::Donor ? n_eff(rho, l0_nm, v0())
                                       : disk_n_eff(rho, radius_nm, height_nm, v0());
  }
};

inline void validate(const Geometry& g) {
  const bool lengths_ok = g.kind == GeometryKind::Donor
                              ? g.l0_nm > 0.0
                              : (g.radius_nm > 0.0 && g.height_nm > 0.0);
  require(lengths_ok && g.lattice_spacing_nm > 0.0, "geometry lengths must be > 0",
          ErrorKind::Validation);
  require(g.rho > 0.0 && g.rho <= 1.0, "spinful fraction rho must lie in (0, 1]",
          ErrorKind::Validation);
  require(g.a_total_uev > 0.0, "a_total must be > 0", ErrorKind::Validation);
}

struct RealisticBath {
  Bath bath;                   // couplings in MHz
  std::size_t candidates = 0;  // spinful sites inside the envelope cutoff
  std::size_t target = 0;      // rounded N_eff
  double normalization = 0.0;  // v0 * sum |Psi(r)|^2 over the lattice
  std::optional<std::string> warning;
};

namespace detail {

struct LatticeSite {
  std::size_t order;  // position in lexicographic traversal
  double density;     // |Psi(r) / Psi(0)|^2
};

}  // namespace detail

/// Lattice-based bath for a donor (spherical Gaussian) or a disk dot
/// (Gaussian radially, uniform along growth).
///
/// Nuclei sit on a simple cubic lattice; each lattice point inside the
/// |Psi/Psi(0)| > 1e-3 cutoff is spinful with probability rho. The N_eff
/// most strongly coupled spinful sites form the bath, and their couplings
/// A_i ~ |Psi(r_i)|^2 are scaled so that sum A_i = a_total. Angles and
/// quadrupolar frequencies follow `cfg` as in sample_bath.
inline RealisticBath build_realistic(const Geometry& geom, SpinLength spin,
                                     const SamplingConfig& cfg) {
  validate(geom);
  validate(cfg);
  const double a = geom.lattice_spacing_nm;
  const bool donor = geom.kind == GeometryKind::Donor;
  const double l0 = donor ? geom.l0_nm : geom.radius_nm;
  const double r_cut = envelope_cutoff_radius(l0);
  const double r_cut2 = r_cut * r_cut;
  const long span = static_cast<long>(std::floor(r_cut / a));

  std::vector<double> z_layers;
  if (donor) {
    for (long k = -span; k <= span; ++k) z_layers.push_back(static_cast<double>(k) * a);
  } else {
    const long layers = std::max(1L, std::lround(geom.height_nm / a));
    for (long k = 0; k < layers; ++k)
      z_layers.push_back((static_cast<double>(k) - 0.5 * static_cast<double>(layers - 1)) * a);
  }

  RandomStream rng(cfg.seed);
  std::vector<detail::LatticeSite> spinful;
  double density_sum = 0.0;
  std::size_t order = 0;
  for (long ix = -span; ix <= span; ++ix) {
    for (long iy = -span; iy <= span; ++iy) {
      for (double z : z_layers) {
        const double x = static_cast<double>(ix) * a;
        const double y = static_cast<double>(iy) * a;
        const double r2 = donor ? x * x + y * y + z * z : x * x + y * y;
        if (r2 >= r_cut2) continue;
        const double density = std::exp(-r2 / (l0 * l0));
        density_sum += density;
        if (rng.uniform_open() < geom.rho) spinful.push_back({order, density});
        ++order;
      }
    }
  }
  require(!spinful.empty(), "no spinful sites inside the envelope cutoff",
          ErrorKind::Validation);

  const double psi0_sq = donor ? 1.0 / (std::pow(units::kPi, 1.5) * l0 * l0 * l0)
                               : 1.0 / (units::kPi * l0 * l0 * geom.height_nm);

  const auto target = static_cast<std::size_t>(std::max(1L, std::lround(geom.target_n_eff())));
  const std::size_t candidates = spinful.size();
  std::stable_sort(spinful.begin(), spinful.end(),
                   [](const auto& x, const auto& y) { return x.density > y.density; });
  if (spinful.size() > target) spinful.resize(target);
  std::sort(spinful.begin(), spinful.end(),
            [](const auto& x, const auto& y) { return x.order < y.order; });

  double kept_density = 0.0;
  for (const auto& s : spinful) kept_density += s.density;
  const double a_total_mhz = units::micro_ev_to_mhz(geom.a_total_uev);
  const double a_mean_mhz = a_total_mhz / static_cast<double>(spinful.size());
  const double fq_mean = cfg.fq_mean_ratio * a_mean_mhz;

  std::vector<Site> sites;
  sites.reserve(spinful.size());
  for (const auto& s : spinful) {
    const auto ang = detail::draw_cap_angles(rng, cfg.theta_p);
    const double f_q = detail::spread(rng, fq_mean, cfg.dfq_max);
    sites.push_back({a_total_mhz * s.density / kept_density, f_q, cfg.eta, ang.theta, ang.phi});
  }

  RealisticBath out{Bath(spin, std::move(sites)), candidates, target,
                    geom.v0() * psi0_sq * density_sum, std::nullopt};
  const double retained = static_cast<double>(out.bath.size());
  if (std::abs(retained - static_cast<double>(target)) > 0.2 * static_cast<double>(target)) {
    out.warning = "retained " + std::to_string(out.bath.size()) +
                  " sites, target N_eff = " + std::to_string(target);
  }
  return out;
}

}  // namespace loschmidt
