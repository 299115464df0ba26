// Command-line runner: `run`, `presets`, `verify --oracle`.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "loschmidt/scenario.hpp"

namespace {

namespace fs = std::filesystem;
namespace sc = loschmidt::scenario;
using loschmidt::ErrorKind;

// Exit statuses; documented in the README.
enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kConfigParse = 2,
  kValidation = 3,
  kOracleGuard = 4,
  kIo = 5,
  kMismatch = 6,
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigParse: return kConfigParse;
    case ErrorKind::Validation: return kValidation;
    case ErrorKind::OracleGuard: return kOracleGuard;
    case ErrorKind::Io: return kIo;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Numerical: break;
  }
  return kFailure;
}

void report(const sc::RunResult& r, const fs::path& out_dir) {
  std::printf("%s: N=%zu I=%s", r.config.name.c_str(), r.bath.size(),
              r.bath.spin().to_string().c_str());
  if (r.half_width) std::printf(" half_width=%.6g", *r.half_width);
  std::printf(" width(%g dB)=%.6g", r.config.spectrum.width_threshold_db, r.spectral_width);
  if (r.info.a_mean_mhz && r.config.units == sc::Units::Mhz)
    std::printf(" [%.6g MHz]", loschmidt::units::normalized_to_mhz(r.spectral_width, *r.info.a_mean_mhz));
  if (r.fit) std::printf(" fit_residual=%.4g", r.fit->residual);
  std::printf(" %.2fs -> %s\n", r.wall_time_s, (out_dir / r.config.outputs.summary_json).c_str());
  if (r.info.warning) std::fprintf(stderr, "warning: %s: %s\n", r.config.name.c_str(), r.info.warning->c_str());
}

int run(const std::vector<sc::ScenarioConfig>& configs, unsigned threads, const fs::path& out_dir) {
  for (const auto& c : configs) report(sc::run_scenario(c, threads, out_dir), out_dir);
  return kOk;
}

int list_presets(const std::string& export_dir) {
  const auto all = sc::presets();
  for (const auto& p : all) {
    std::printf("%-12s %s\n", p.name.c_str(), p.description.c_str());
    for (const auto& v : p.variants) std::printf("  %-28s %s\n", v.name.c_str(), v.description.c_str());
  }
  if (export_dir.empty()) return kOk;
  std::error_code ec;
  fs::create_directories(export_dir, ec);
  loschmidt::require(!ec, "cannot create '" + export_dir + "'", ErrorKind::Io);
  for (const auto& p : all) {
    for (const auto& v : p.variants) {
      const fs::path path = fs::path(export_dir) / (v.name + ".yaml");
      std::ofstream out(path);
      out << sc::to_yaml(v);
      loschmidt::require(static_cast<bool>(out), "cannot write '" + path.string() + "'", ErrorKind::Io);
    }
  }
  return kOk;
}

// Engine against the full-space oracle on at most 1000 grid points.
int verify(const sc::ScenarioConfig& c, unsigned threads) {
  const auto built = sc::build_bath(c);
  const std::size_t n = std::min<std::size_t>(c.grid.n_points, 1000);
  const auto grid = loschmidt::TimeGrid::uniform(c.grid.t_max.value, n);
  const auto oracle = loschmidt::brute_force_le(built.bath, grid);
  const auto engine = loschmidt::loschmidt_echo(built.bath, grid, {.threads = threads});
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(engine.m[k] - oracle.m[k]));
  const bool ok = worst < 1e-10;
  std::printf("%s: max |M_engine - M_oracle| = %.3e over %zu points (%s)\n", c.name.c_str(), worst, n,
              ok ? "ok" : "MISMATCH");
  return ok ? kOk : kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loschmidt echo of central-spin nuclear baths"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  std::string out_dir = ".";
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", out_dir, "directory for artifacts");
  app.set_version_flag("--version", LOSCHMIDT_VERSION);

  auto* run_cmd = app.add_subcommand("run", "run a scenario file or a bundled preset");
  std::string config;
  std::string preset;
  auto* cfg_opt = run_cmd->add_option("config", config, "scenario file (YAML)");
  auto* preset_opt = run_cmd->add_option("--preset", preset, "preset group or variant name");
  cfg_opt->excludes(preset_opt);

  auto* presets_cmd = app.add_subcommand("presets", "list bundled figure presets");
  std::string export_dir;
  presets_cmd->add_option("--export", export_dir, "write every variant as a scenario file here");

  auto* verify_cmd = app.add_subcommand("verify", "cross-check a small scenario against the oracle");
  std::string oracle_config;
  verify_cmd->add_option("--oracle", oracle_config, "scenario file (YAML)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      loschmidt::require(!config.empty() || !preset.empty(), "run: give a config file or --preset");
      const auto configs = preset.empty() ? std::vector{sc::load_scenario(config)} : sc::find_preset(preset);
      return run(configs, threads, out_dir);
    }
    if (*presets_cmd) return list_presets(export_dir);
    if (*verify_cmd) return verify(sc::load_scenario(oracle_config), threads);
  } catch (const loschmidt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
