// Acceptance gate. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero when any criterion fails. Scenario-based checks run the bundled
// presets, so every number here comes from the same seed policy as the CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "loschmidt/scenario.hpp"
#include "unit/test_support.hpp"

namespace {

using namespace loschmidt;
namespace sc = loschmidt::scenario;
using Clock = std::chrono::steady_clock;

constexpr double kPi = units::kPi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

int g_failures = 0;

template <typename F>
void criterion(const char* id, F&& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " exception: " << e.what();
  }
  if (!o.pass) ++g_failures;
  std::printf("[%s] %s:%s\n", o.pass ? "PASS" : "FAIL", id, o.detail.str().c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Preset runs are shared between criteria.
std::map<std::string, sc::RunResult> g_runs;

const sc::RunResult& preset_run(const std::string& name) {
  auto it = g_runs.find(name);
  if (it == g_runs.end()) {
    const auto cfg = sc::find_preset(name);
    require(cfg.size() == 1, "expected a single preset variant: " + name);
    it = g_runs.emplace(name, sc::simulate(cfg.front())).first;
  }
  return it->second;
}

Bath synthetic(std::size_t n, int two_i, double theta_p, double da, double fq, double eta,
               std::uint64_t seed) {
  SamplingConfig cfg;
  cfg.n = n;
  cfg.theta_p = theta_p;
  cfg.da_max = da;
  cfg.fq_mean_ratio = fq;
  cfg.dfq_max = fq > 0.0 ? 0.2 : 0.0;
  cfg.eta = eta;
  cfg.seed = seed;
  return sample_bath(cfg, SpinLength(two_i), 1.0);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  return testing::max_abs_diff(a, b);
}

// Power at |f| = freq on the non-negative half, linearly interpolated.
double power_at(const Spectrum& s, double freq) {
  const std::size_t dc = s.dc_index();
  const double x = freq / s.df;
  const auto i = static_cast<std::size_t>(x);
  if (dc + i + 1 >= s.freqs.size()) return s.db_floor;
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * s.power_db[dc + i] + f * s.power_db[dc + i + 1];
}

// Bins of `a` (f >= 0) where either spectrum lies above the threshold.
struct BandComparison {
  double max_abs_db = 0.0;
  double max_excess_db = -1e300;  // max of (b - a)
  std::size_t bins = 0;
};

BandComparison compare_band(const Spectrum& a, const Spectrum& b, double threshold_db) {
  BandComparison out;
  for (std::size_t i = a.dc_index(); i < a.freqs.size(); ++i) {
    const double pa = a.power_db[i];
    const double pb = power_at(b, a.freqs[i]);
    if (pa <= threshold_db && pb <= threshold_db) continue;
    ++out.bins;
    out.max_abs_db = std::max(out.max_abs_db, std::abs(pb - pa));
    out.max_excess_db = std::max(out.max_excess_db, pb - pa);
  }
  return out;
}

}  // namespace

int main() {
  const auto t_start = Clock::now();

  criterion("oracle_equivalence", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto grid = TimeGrid::uniform(20.0, 1000);
    double worst = 0.0;
    int baths = 0;
    std::uint64_t seed = 1000;
    while (baths < 50) {
      for (int two_i : {1, 2, 3}) {
        for (std::size_t n : {1u, 2u, 3u, 4u}) {
          for (double fq : {0.0, 1.0, 10.0}) {
            if (baths == 50) break;
            const auto bath = synthetic(n, two_i, kPi, 0.5, fq, fq > 0.0 ? 0.5 : 0.0, seed++);
            worst = std::max(worst,
                             max_abs_diff(loschmidt_echo(bath, grid).m, brute_force_le(bath, grid).m));
            ++baths;
          }
        }
      }
    }
    const double elapsed = seconds_since(t0);
    o.pass = worst < 1e-10 && elapsed < 60.0;
    o.detail << " " << baths << " baths, max |dM| = " << worst << " (< 1e-10), " << elapsed
             << " s (< 60 s)";
  });

  criterion("uniaxial_quadrupole_null_effect", [](Outcome& o) {
    const auto grid = TimeGrid::uniform(10.0, 4000);
    double worst = 0.0;
    std::uint64_t seed = 1;
    for (int two_i : {2, 3, 9})
      for (double fq : {1.0, 10.0, 100.0}) {
        const auto bath = synthetic(200, two_i, kPi, 0.5, fq, 0.0, seed++);
        worst = std::max(worst, max_abs_diff(le_full(bath, grid).m, le_hf(bath, grid).m));
      }
    o.pass = worst < 1e-10;
    o.detail << " eta = 0, fQ/A in {1, 10, 100}, I in {1, 3/2, 9/2}: max |le_full - le_hf| = "
             << worst << " (< 1e-10)";
  });

  criterion("periodicity", [](Outcome& o) {
    const std::size_t per_pi = 8192;
    const auto grid = TimeGrid::uniform(3.5 * kPi, 7 * per_pi / 2 + 1);
    const auto s = le_hf(synthetic(1000, 1, kPi, 0.0, 0.0, 0.0, 1), grid);
    double worst_peak = 0.0;
    for (std::size_t k = 1; k <= 3; ++k)
      worst_peak = std::max(worst_peak, std::abs(s.m[k * per_pi] - 1.0));
    const double hw0 = revival_halfwidth(s, 0.0, 0.5);
    double worst_hw = 0.0;
    for (int k = 1; k <= 3; ++k)
      worst_hw = std::max(worst_hw,
                          std::abs(revival_halfwidth(s, k * kPi - 0.5, k * kPi + 0.5) / hw0 - 1.0));
    o.pass = worst_peak < 1e-9 && worst_hw < 0.01;
    o.detail << " max |M(k pi) - 1| = " << worst_peak << " (< 1e-9), max relative HW spread = "
             << worst_hw << " (< 0.01)";
  });

  criterion("size_scaling", [](Outcome& o) {
    const std::vector<std::pair<std::string, double>> runs = {
        {"fig1_N100", 100.0}, {"fig1_topN1000", 1000.0}, {"fig1_N10000", 10000.0}};
    double worst = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        const double hi = *preset_run(runs[i].first).half_width;
        const double hj = *preset_run(runs[j].first).half_width;
        const double expected = std::sqrt(runs[j].second / runs[i].second);
        worst = std::max(worst, std::abs(hi / hj / expected - 1.0));
        o.detail << " HW(" << runs[i].second << ")/HW(" << runs[j].second << ") = " << hi / hj
                 << " vs " << expected << ";";
      }
    }
    o.pass = worst < 0.15;
    o.detail << " worst deviation " << worst << " (< 0.15)";
  });

  criterion("spin_scaling", [](Outcome& o) {
    const std::vector<std::pair<std::string, int>> runs = {
        {"fig3_I12", 1}, {"fig3_I32", 3}, {"fig3_I52", 5}, {"fig3_I92", 9}};
    std::vector<CollapseRun> collapse;
    for (const auto& [name, two_i] : runs) {
      const auto& r = preset_run(name);
      collapse.push_back({r.echo, r.bath.spin(), r.bath.size()});
    }
    const double err = collapse_error(collapse);
    double worst = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        const double wi = preset_run(runs[i].first).spectral_width;
        const double wj = preset_run(runs[j].first).spectral_width;
        const double expected = std::sqrt(static_cast<double>(runs[j].second) / runs[i].second);
        worst = std::max(worst, std::abs(wj / wi / expected - 1.0));
      }
    }
    o.pass = err < 0.05 && worst < 0.15;
    o.detail << " collapse error = " << err << " (< 0.05); -40 dB widths";
    for (const auto& [name, two_i] : runs) o.detail << " " << preset_run(name).spectral_width;
    o.detail << ", worst sqrt(I) deviation " << worst << " (< 0.15)";
  });

  criterion("polarization_and_spread", [](Outcome& o) {
    const auto& unpol = preset_run("fig2_top_unpolarized");
    const auto& pol = preset_run("fig2_top_polarized");
    const double amp_u = revival_peak(unpol.echo, kPi - 0.5, kPi + 0.5).m;
    const double amp_p = revival_peak(pol.echo, kPi - 0.5, kPi + 0.5).m;
    const bool polar_ok = amp_p > amp_u && *pol.half_width > *unpol.half_width;
    o.detail << " theta_p = pi/8 vs pi: revival " << amp_p << " vs " << amp_u << ", HW "
             << *pol.half_width << " vs " << *unpol.half_width << ";";

    std::vector<double> hws;
    std::vector<double> amps;
    for (const char* name : {"fig2_bottom_da0125", "fig2_bottom_da025", "fig2_bottom_da05"}) {
      const auto& r = preset_run(name);
      hws.push_back(*r.half_width);
      amps.push_back(revival_peak(r.echo, kPi - 0.5, kPi + 0.5).m);
    }
    const auto [lo, hi] = std::minmax_element(hws.begin(), hws.end());
    const double hw_spread = *hi / *lo - 1.0;
    const bool decreasing = amps[0] > amps[1] && amps[1] > amps[2];
    o.detail << " dA_max in {0.0125, 0.025, 0.05}: HW spread " << hw_spread
             << " (< 0.02), revivals " << amps[0] << " > " << amps[1] << " > " << amps[2];
    o.pass = polar_ok && hw_spread < 0.02 && decreasing;
  });

  criterion("realistic_means", [](Outcome& o) {
    const auto& donor = preset_run("fig5_donor_I92_unpol_fq0");
    const auto& dot = preset_run("fig5_qdot_I92_fq0");
    const double a_d = donor.info.a_mean_mhz.value();
    const double a_q = dot.info.a_mean_mhz.value();
    o.pass = std::abs(a_d / 0.341 - 1.0) < 0.05 && std::abs(a_q / 1.714 - 1.0) < 0.05;
    o.detail << " donor A = " << a_d << " MHz (0.341 +- 5%), N = " << donor.bath.size()
             << "; quantum dot A = " << a_q << " MHz (1.714 +- 5%), N = " << dot.bath.size();
  });

  criterion("realistic_spectra", [](Outcome& o) {
    auto mhz = [](const sc::RunResult& r) {
      return units::normalized_to_mhz(r.spectral_width, r.info.a_mean_mhz.value());
    };
    const auto t0 = Clock::now();
    const auto& q92_fq10 = preset_run("fig5_qdot_I92_fq10");
    const double qdot_seconds = seconds_since(t0);
    const auto& q92 = preset_run("fig5_qdot_I92_fq0");
    const auto& q32 = preset_run("fig5_qdot_I32_fq0");
    const auto& q32_fq10 = preset_run("fig5_qdot_I32_fq10");

    const double w_q92 = mhz(q92);
    const bool qdot_width_ok = w_q92 >= 30.0 && w_q92 <= 300.0;
    o.detail << " qdot I=9/2 width " << w_q92 << " MHz in [30, 300];";

    double donor_max = 0.0;
    for (const char* name : {"fig5_donor_I32_unpol_fq0", "fig5_donor_I92_unpol_fq0",
                             "fig5_donor_I92_pol_fq0", "fig5_donor_I92_pol_fq10"})
      donor_max = std::max(donor_max, mhz(preset_run(name)));
    const bool donor_ok = donor_max < 10.0;
    o.detail << " donor widest " << donor_max << " MHz (< 10);";

    const double threshold = -40.0;
    const auto c92 = compare_band(q92.spectrum, q92_fq10.spectrum, threshold);
    const auto c32 = compare_band(q32.spectrum, q32_fq10.spectrum, threshold);
    const double qi_dot = std::max(c92.max_abs_db, c32.max_abs_db);
    const bool qdot_qi_ok = qi_dot < 1.0;
    o.detail << " qdot fQ 0 vs 10 max |dP| " << qi_dot << " dB (< 1) over " << c32.bins << "/"
             << c92.bins << " bins;";

    const auto& d0 = preset_run("fig5_donor_I92_pol_fq0");
    const auto& d10 = preset_run("fig5_donor_I92_pol_fq10");
    const auto cd = compare_band(d0.spectrum, d10.spectrum, threshold);
    const bool donor_qi_ok = cd.max_excess_db > 3.0;
    o.detail << " donor theta_p = pi/8 fQ 10 over fQ 0 by up to " << cd.max_excess_db
             << " dB (> 3);";

    const bool time_ok = qdot_seconds < 300.0;
    o.detail << " qdot N=" << q92_fq10.bath.size() << " I=9/2 with QI, "
             << q92_fq10.echo.m.size() << " points: " << qdot_seconds << " s (< 300)";
    o.pass = qdot_width_ok && donor_ok && qdot_qi_ok && donor_qi_ok && time_ok;
  });

  criterion("fit_quality", [](Outcome& o) {
    const auto grid = TimeGrid::uniform(3.5 * kPi, 20000);
    EchoSeries synthetic_series{grid, {}, {}, {}};
    for (double t : grid.samples()) {
      const double lm = phenomenological_log_m(t, 1000, SpinLength(1), 0.01, 0.5, 0.1);
      synthetic_series.log_m.push_back(lm);
      synthetic_series.m.push_back(std::exp(lm));
    }
    const auto rt = fit_phenomenological(synthetic_series, 1000, SpinLength(1), 0.01);
    const double rt_err = std::max(std::abs(rt.alpha_p - 0.5), std::abs(rt.beta_p - 0.1));

    const auto& run = preset_run("fig1_topN1000");
    const auto& fit = *run.fit;
    o.pass = rt_err < 1e-8 && fit.residual < 0.05;
    o.detail << " round trip error " << rt_err << " (< 1e-8); N=1000 I=1/2 dA_max=0.025A over "
             << run.echo.grid.t_max() / kPi << " pi: alpha_p = " << fit.alpha_p
             << ", beta_p = " << fit.beta_p << ", residual = " << fit.residual
             << " log10 (< 0.05)";
  });

  std::printf("%d criteria failed, %.1f s total\n", g_failures, seconds_since(t_start));
  return g_failures == 0 ? 0 : 1;
}
