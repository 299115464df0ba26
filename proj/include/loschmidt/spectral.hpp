#pragma once

// Power spectra of the echo.
//
// M(t) is real and even in t, so the transform is taken over the even
// extension of the sampled half-line: the circular buffer holds
// M(0), M(dt), ..., M(t_max) followed by the mirror image, zero-padded in
// the middle (large |t|) up to a power of two. Amplitudes are reported as
// 20 log10 |M(f)| relative to the dc bin.
//
// Frequencies use the convention x(t) = sum_f X(f) e^{+2 pi i f t}, so a
// factor e^{-i 2 a m t} contributes a line at f = -a m / pi.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "loschmidt/bath.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/error.hpp"
#include "loschmidt/spin_algebra.hpp"

namespace loschmidt {

enum class Window { None, Hann };

struct SpectrumOptions {
  Window window = Window::None;
  double db_floor = -160.0;
};

/// Two-sided spectrum, frequencies ascending with dc in the middle.
struct Spectrum {
  std::vector<double> freqs;      // normalized f~ = f / A_mean
  std::vector<double> power_db;   // 20 log10(|M(f)| / |M(0)|), clipped at db_floor
  std::vector<double> amplitude;  // |M(f)| in continuous-transform scaling (dt * DFT)
  double db_floor = -160.0;
  double df = 0.0;

  std::size_t dc_index() const { return freqs.size() / 2 - 1; }
};

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Real-to-complex DFT X_k = sum_j x_j e^{-2 pi i j k / n}, k = 0 .. n/2.
inline std::vector<std::complex<double>> real_dft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  require(in && out, "fftw allocation failed", ErrorKind::Numerical);
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE));
  require(plan != nullptr, "fftw planning failed", ErrorKind::Numerical);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());
  std::vector<std::complex<double>> result(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) result[k] = {out.get()[k][0], out.get()[k][1]};
  return result;
}

}  // namespace detail

/// Even extension of the series as it enters the transform.
inline std::vector<double> even_extension(const EchoSeries& series, Window window = Window::None) {
  const std::size_t n = series.m.size();
  require(n >= 2, "series too short for a spectrum");
  const std::size_t len = detail::next_pow2(2 * (n - 1));
  std::vector<double> x(len, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double w = 1.0;
    if (window == Window::Hann) {
      const double c = std::cos(0.5 * std::numbers::pi * static_cast<double>(j) /
                                static_cast<double>(n - 1));
      w = c * c;
    }
    x[j] = w * series.m[j];
    if (j > 0) x[len - j] = x[j];
  }
  return x;
}

inline Spectrum power_spectrum(const EchoSeries& series, const SpectrumOptions& opts = {}) {
  require(series.grid.is_uniform(), "power spectrum needs a uniform time grid",
          ErrorKind::Validation);
  const double dt = series.grid.step();
  const auto x = even_extension(series, opts.window);
  const std::size_t len = x.size();
  const auto dft = detail::real_dft(x);

  Spectrum spec;
  spec.db_floor = opts.db_floor;
  spec.df = 1.0 / (static_cast<double>(len) * dt);
  // Bins -len/2+1 .. len/2; the even signal makes X(-f) = X(f).
  spec.freqs.resize(len);
  spec.amplitude.resize(len);
  spec.power_db.resize(len);
  const auto half = static_cast<long>(len / 2);
  for (long b = -half + 1; b <= half; ++b) {
    const auto i = static_cast<std::size_t>(b + half - 1);
    spec.freqs[i] = static_cast<double>(b) * spec.df;
    spec.amplitude[i] = dt * std::abs(dft[static_cast<std::size_t>(std::abs(b))]);
  }
  const double dc = spec.amplitude[spec.dc_index()];
  require(dc > 0.0, "spectrum has no dc component", ErrorKind::Numerical);
  for (std::size_t i = 0; i < len; ++i) {
    const double ratio = spec.amplitude[i] / dc;
    const double db = ratio > 0.0 ? 20.0 * std::log10(ratio) : opts.db_floor;
    spec.power_db[i] = std::max(db, opts.db_floor);
  }
  spec.power_db[spec.dc_index()] = 0.0;
  return spec;
}

/// Largest |f| whose power lies above threshold_db (0 for a dc-only spectrum).
inline double spectral_width(const Spectrum& spec, double threshold_db) {
  require(threshold_db < 0.0, "width threshold must be below 0 dB");
  double width = 0.0;
  for (std::size_t i = 0; i < spec.freqs.size(); ++i)
    if (spec.power_db[i] > threshold_db) width = std::max(width, std::abs(spec.freqs[i]));
  return width;
}

// ---------------------------------------------------------------------------
// Exact line spectrum
// ---------------------------------------------------------------------------

struct SpectralLine {
  double freq;
  double weight;
};

/// Exact transform of M(t~): weights W_i^m W_i^m' summed over all (m, m')
/// configurations at f~ = (1/pi) sum_i a_i (m_i' - m_i), a_i = A_i / A_mean.
struct DeltaComb {
  std::vector<SpectralLine> lines;  // ascending frequency

  double total_weight() const {
    double s = 0.0;
    for (const auto& l : lines) s += l.weight;
    return s;
  }

  /// M(t~) = sum_lines w e^{+2 pi i f t~}.
  std::complex<double> evaluate(double t) const {
    std::complex<double> acc = 0.0;
    for (const auto& l : lines) acc += l.weight * std::polar(1.0, 2.0 * std::numbers::pi * l.freq * t);
    return acc;
  }
};

inline constexpr double kCombEnumerationLimit = 1e7;

namespace detail {

inline std::vector<SpectralLine> merge_lines(std::vector<SpectralLine> lines, double tol) {
  std::sort(lines.begin(), lines.end(),
            [](const auto& x, const auto& y) { return x.freq < y.freq; });
  std::vector<SpectralLine> merged;
  for (const auto& l : lines) {
    if (!merged.empty() && l.freq - merged.back().freq <= tol) {
      merged.back().weight += l.weight;
    } else {
      merged.push_back(l);
    }
  }
  return merged;
}

}  // namespace detail

/// Exact line spectrum of a hyperfine-only bath. The site combs are
/// convolved in site order, which sums the same configurations as a direct
/// enumeration; the enumeration guard (2I+1)^{2N} <= 1e7 still applies.
inline DeltaComb delta_comb(const Bath& bath) {
  const double configs =
      std::pow(static_cast<double>(bath.spin().dim()), 2.0 * static_cast<double>(bath.size()));
  require(configs <= kCombEnumerationLimit,
          "delta comb enumeration exceeds (2I+1)^{2N} <= 1e7", ErrorKind::OracleGuard);
  const SpinLength spin = bath.spin();
  const double tol = 1e-12;  // normalized units, i.e. 1e-12 * A_mean
  std::vector<SpectralLine> comb{{0.0, 1.0}};
  for (const auto& site : bath.sites()) {
    const double a = site.a / bath.a_mean();
    const auto w = weights(spin, site.theta);
    std::vector<SpectralLine> next;
    next.reserve(comb.size() * static_cast<std::size_t>(spin.dim() * spin.dim()));
    for (const auto& line : comb) {
      for (int j = 0; j < spin.dim(); ++j) {
        for (int k = 0; k < spin.dim(); ++k) {
          const double dm = spin.m(k) - spin.m(j);  // m' - m
          next.push_back({line.freq + a * dm / std::numbers::pi, line.weight * w(j) * w(k)});
        }
      }
    }
    comb = detail::merge_lines(std::move(next), tol);
  }
  return {std::move(comb)};
}

}  // namespace loschmidt
