#pragma once

// Declarative scenario files, the bundled figure presets, and the artifact
// writers behind the command-line runner.
//
// A scenario is one bath, one time grid and one set of outputs. Presets are
// named groups of scenarios ("variants") that together reproduce a figure.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "loschmidt/loschmidt.hpp"

#ifndef LOSCHMIDT_VERSION
#define LOSCHMIDT_VERSION "0.0.0"
#endif

namespace loschmidt::scenario {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxPoints = std::size_t{1} << 24;

using Json = nlohmann::ordered_json;

enum class Units { Normalized, Mhz };

/// A number written in the config either plainly or as a multiple of pi
/// ("pi/8", "3.5pi"); the text is kept so exports read the same way.
struct PiValue {
  double value = 0.0;
  std::string text;
};

struct SyntheticSpec {
  std::size_t n = 1;
  PiValue theta_p{units::kPi, "pi"};
  double da_max = 0.0;
  std::optional<double> a_mean_mhz;
};

struct GeometrySpec {
  Geometry geometry;
  PiValue theta_p{units::kPi, "pi"};
  std::optional<double> n_eff;  // when set, the lattice spacing is derived from it
  std::optional<double> lattice_spacing_nm;
};

struct QiSpec {
  double fq_mean_ratio = 0.0;
  double eta = 0.0;
  double dfq_max = 0.0;
};

struct GridSpec {
  PiValue t_max{1.0, "1"};
  std::size_t n_points = 2;
};

struct SpectrumSpec {
  Window window = Window::None;
  double db_floor = -160.0;
  double width_threshold_db = -40.0;
};

struct FitSpec {
  bool enabled = false;
  double mask = 1e-12;
};

struct OutputSpec {
  std::string echo_csv;
  std::string spectrum_csv;
  std::string summary_json;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  std::string description;
  SpinLength spin{1};
  std::uint64_t seed = 1;
  Units units = Units::Normalized;
  std::variant<SyntheticSpec, GeometrySpec> bath;
  QiSpec qi;
  GridSpec grid;
  SpectrumSpec spectrum;
  FitSpec fit;
  OutputSpec outputs;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void parse_error(const std::string& path, const std::string& msg) {
  fail(ErrorKind::ConfigParse, path + ": " + msg);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void check_keys(const YAML::Node& node, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) parse_error(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) parse_error(join(path, key), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) parse_error(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    parse_error(path, "cannot read '" + node.Scalar() + "'");
  }
}

template <typename T>
std::optional<T> optional(const YAML::Node& parent, const char* key, const std::string& path) {
  const YAML::Node node = parent[key];
  if (!node) return std::nullopt;
  return scalar<T>(node, join(path, key));
}

template <typename T>
T required(const YAML::Node& parent, const char* key, const std::string& path) {
  auto v = optional<T>(parent, key, path);
  if (!v) parse_error(join(path, key), "required key is missing");
  return *v;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace detail

/// "pi", "pi/8", "3.5pi", "3*pi/4", "0.25" and friends.
inline PiValue parse_pi_value(const std::string& raw, const std::string& path) {
  static const std::regex re(
      R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*(\d+\.?\d*(?:e[+-]?\d+)?))?$)");
  const std::string text = detail::trim(raw);
  std::smatch m;
  const std::string low = detail::lower(text);
  if (!std::regex_match(low, m, re) || (!m[1].matched && !m[2].matched))
    detail::parse_error(path, "cannot read '" + raw + "' as a number or multiple of pi");
  double v = m[1].matched ? std::stod(m[1].str()) : 1.0;
  if (m[2].matched) v *= units::kPi;
  if (m[3].matched) v /= std::stod(m[3].str());
  return {v, text};
}

/// "1/2", "9/2", "1", or a decimal such as 1.5.
inline SpinLength parse_spin(const std::string& raw, const std::string& path) {
  const std::string text = detail::trim(raw);
  static const std::regex frac(R"(^(\d+)\s*/\s*(\d+)$)");
  static const std::regex dec(R"(^\d+(\.\d+)?$)");
  std::smatch m;
  double value = 0.0;
  if (std::regex_match(text, m, frac)) {
    value = std::stod(m[1].str()) / std::stod(m[2].str());
  } else if (std::regex_match(text, dec)) {
    value = std::stod(text);
  } else {
    detail::parse_error(path, "cannot read '" + raw + "' as a spin length");
  }
  const double two_i = 2.0 * value;
  require(std::abs(two_i - std::round(two_i)) < 1e-9 && two_i >= 1.0 && two_i <= 255.0,
          path + ": spin must be a positive multiple of 1/2 up to 255/2", ErrorKind::Validation);
  return SpinLength(static_cast<int>(std::lround(two_i)));
}

namespace detail {

inline SyntheticSpec parse_synthetic(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"n", "theta_p", "da_max", "a_mean_mhz"});
  SyntheticSpec s;
  const auto n = required<long long>(node, "n", path);
  require(n >= 1, join(path, "n") + ": must be >= 1", ErrorKind::Validation);
  s.n = static_cast<std::size_t>(n);
  if (auto tp = optional<std::string>(node, "theta_p", path))
    s.theta_p = parse_pi_value(*tp, join(path, "theta_p"));
  s.da_max = optional<double>(node, "da_max", path).value_or(0.0);
  s.a_mean_mhz = optional<double>(node, "a_mean_mhz", path);
  return s;
}

inline GeometrySpec parse_geometry(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"kind", "l0_nm", "radius_nm", "height_nm", "rho", "a_total_ueV",
                          "lattice_spacing_nm", "n_eff", "theta_p"});
  GeometrySpec s;
  const auto kind = lower(required<std::string>(node, "kind", path));
  if (kind == "donor") {
    s.geometry.kind = GeometryKind::Donor;
    s.geometry.l0_nm = required<double>(node, "l0_nm", path);
  } else if (kind == "disk") {
    s.geometry.kind = GeometryKind::DiskDot;
    s.geometry.radius_nm = required<double>(node, "radius_nm", path);
    s.geometry.height_nm = required<double>(node, "height_nm", path);
  } else {
    parse_error(join(path, "kind"), "expected 'donor' or 'disk'");
  }
  s.geometry.rho = required<double>(node, "rho", path);
  s.geometry.a_total_uev = required<double>(node, "a_total_ueV", path);
  if (auto tp = optional<std::string>(node, "theta_p", path))
    s.theta_p = parse_pi_value(*tp, join(path, "theta_p"));
  s.n_eff = optional<double>(node, "n_eff", path);
  s.lattice_spacing_nm = optional<double>(node, "lattice_spacing_nm", path);
  return s;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const YAML::Node& root) {
  using namespace detail;
  check_keys(root, "", {"schema_version", "name", "description", "spin", "seed", "units", "bath",
                        "qi", "grid", "spectrum", "fit", "outputs"});
  ScenarioConfig c;
  c.schema_version = required<int>(root, "schema_version", "");
  if (c.schema_version != kSchemaVersion)
    parse_error("schema_version", "unsupported version " + std::to_string(c.schema_version));
  c.name = required<std::string>(root, "name", "");
  c.description = optional<std::string>(root, "description", "").value_or("");
  c.spin = parse_spin(required<std::string>(root, "spin", ""), "spin");
  c.seed = optional<std::uint64_t>(root, "seed", "").value_or(1);
  const auto u = lower(optional<std::string>(root, "units", "").value_or("normalized"));
  if (u == "normalized") {
    c.units = Units::Normalized;
  } else if (u == "mhz") {
    c.units = Units::Mhz;
  } else {
    parse_error("units", "expected 'normalized' or 'MHz'");
  }

  const YAML::Node bath = root["bath"];
  if (!bath) parse_error("bath", "required key is missing");
  check_keys(bath, "bath", {"synthetic", "geometry"});
  const bool syn = static_cast<bool>(bath["synthetic"]);
  const bool geo = static_cast<bool>(bath["geometry"]);
  require(syn != geo, "bath: exactly one of 'synthetic' or 'geometry' must be given",
          ErrorKind::Validation);
  if (syn) {
    c.bath = parse_synthetic(bath["synthetic"], "bath.synthetic");
  } else {
    c.bath = parse_geometry(bath["geometry"], "bath.geometry");
  }

  if (const YAML::Node qi = root["qi"]) {
    check_keys(qi, "qi", {"fq_mean_ratio", "eta", "dfq_max"});
    c.qi.fq_mean_ratio = optional<double>(qi, "fq_mean_ratio", "qi").value_or(0.0);
    c.qi.eta = optional<double>(qi, "eta", "qi").value_or(0.0);
    c.qi.dfq_max = optional<double>(qi, "dfq_max", "qi").value_or(0.0);
  }

  const YAML::Node grid = root["grid"];
  if (!grid) parse_error("grid", "required key is missing");
  check_keys(grid, "grid", {"t_max", "n_points"});
  c.grid.t_max = parse_pi_value(required<std::string>(grid, "t_max", "grid"), "grid.t_max");
  const auto np = required<long long>(grid, "n_points", "grid");
  require(np >= 2, "grid.n_points: must be >= 2", ErrorKind::Validation);
  c.grid.n_points = static_cast<std::size_t>(np);

  if (const YAML::Node sp = root["spectrum"]) {
    check_keys(sp, "spectrum", {"window", "db_floor", "width_threshold_db"});
    const auto w = lower(optional<std::string>(sp, "window", "spectrum").value_or("none"));
    if (w == "none") {
      c.spectrum.window = Window::None;
    } else if (w == "hann") {
      c.spectrum.window = Window::Hann;
    } else {
      parse_error("spectrum.window", "expected 'none' or 'hann'");
    }
    c.spectrum.db_floor = optional<double>(sp, "db_floor", "spectrum").value_or(-160.0);
    c.spectrum.width_threshold_db =
        optional<double>(sp, "width_threshold_db", "spectrum").value_or(-40.0);
  }

  if (const YAML::Node fit = root["fit"]) {
    check_keys(fit, "fit", {"enabled", "mask"});
    c.fit.enabled = optional<bool>(fit, "enabled", "fit").value_or(false);
    c.fit.mask = optional<double>(fit, "mask", "fit").value_or(1e-12);
  }

  if (const YAML::Node out = root["outputs"]) {
    check_keys(out, "outputs", {"echo_csv", "spectrum_csv", "summary_json"});
    c.outputs.echo_csv = optional<std::string>(out, "echo_csv", "outputs").value_or("");
    c.outputs.spectrum_csv = optional<std::string>(out, "spectrum_csv", "outputs").value_or("");
    c.outputs.summary_json = optional<std::string>(out, "summary_json", "outputs").value_or("");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline SamplingConfig sampling_config(const ScenarioConfig& c) {
  SamplingConfig s;
  if (const auto* syn = std::get_if<SyntheticSpec>(&c.bath)) {
    s.n = syn->n;
    s.theta_p = syn->theta_p.value;
    s.da_max = syn->da_max;
  } else {
    s.theta_p = std::get<GeometrySpec>(c.bath).theta_p.value;
  }
  s.dfq_max = c.qi.dfq_max;
  s.eta = c.qi.eta;
  s.fq_mean_ratio = c.qi.fq_mean_ratio;
  s.seed = c.seed;
  return s;
}

namespace detail {

inline bool plain_file_name(const std::string& s) {
  return !s.empty() && s != "." && s != ".." && s.find('/') == std::string::npos &&
         s.find('\\') == std::string::npos;
}

}  // namespace detail

/// Range checks plus derived fields (default output names, lattice spacing).
/// Throws ErrorKind::Validation.
inline ScenarioConfig validate(ScenarioConfig c) {
  constexpr auto V = ErrorKind::Validation;
  static const std::regex name_re(R"(^[A-Za-z0-9_.-]+$)");
  require(std::regex_match(c.name, name_re),
          "name: use letters, digits, '_', '-' or '.' only", V);

  validate(sampling_config(c));
  if (auto* syn = std::get_if<SyntheticSpec>(&c.bath)) {
    require(syn->n <= 10'000'000, "bath.synthetic.n: at most 1e7 sites", V);
    if (syn->a_mean_mhz)
      require(std::isfinite(*syn->a_mean_mhz) && *syn->a_mean_mhz > 0.0,
              "bath.synthetic.a_mean_mhz: must be > 0", V);
    require(c.units == Units::Normalized || syn->a_mean_mhz.has_value(),
            "units: MHz output needs bath.synthetic.a_mean_mhz", V);
  } else {
    auto& g = std::get<GeometrySpec>(c.bath);
    require(g.n_eff.has_value() != g.lattice_spacing_nm.has_value(),
            "bath.geometry: give exactly one of n_eff or lattice_spacing_nm", V);
    g.geometry.lattice_spacing_nm = 1.0;  // placeholder so the shape checks can run
    validate(g.geometry);
    if (g.n_eff) {
      require(std::isfinite(*g.n_eff) && *g.n_eff >= 1.0, "bath.geometry.n_eff: must be >= 1", V);
      const Geometry& geo = g.geometry;
      const double v0 = geo.kind == GeometryKind::Donor
                            ? v0_for_n_eff(*g.n_eff, geo.rho, geo.l0_nm)
                            : disk_v0_for_n_eff(*g.n_eff, geo.rho, geo.radius_nm, geo.height_nm);
      g.geometry.lattice_spacing_nm = std::cbrt(v0);
    } else {
      g.geometry.lattice_spacing_nm = *g.lattice_spacing_nm;
    }
    validate(g.geometry);
  }

  require(std::isfinite(c.grid.t_max.value) && c.grid.t_max.value > 0.0, "grid.t_max: must be > 0",
          V);
  require(c.grid.n_points >= 2 && c.grid.n_points <= kMaxPoints,
          "grid.n_points: must lie in [2, 2^24]", V);
  require(c.spectrum.db_floor < 0.0, "spectrum.db_floor: must be < 0", V);
  require(c.spectrum.width_threshold_db < 0.0 &&
              c.spectrum.width_threshold_db > c.spectrum.db_floor,
          "spectrum.width_threshold_db: must lie between db_floor and 0", V);
  require(c.fit.mask > 0.0 && c.fit.mask < 1.0, "fit.mask: must lie in (0, 1)", V);

  if (c.outputs.echo_csv.empty()) c.outputs.echo_csv = c.name + "_echo.csv";
  if (c.outputs.spectrum_csv.empty()) c.outputs.spectrum_csv = c.name + "_spectrum.csv";
  if (c.outputs.summary_json.empty()) c.outputs.summary_json = c.name + "_summary.json";
  for (const auto* f : {&c.outputs.echo_csv, &c.outputs.spectrum_csv, &c.outputs.summary_json})
    require(detail::plain_file_name(*f), "outputs: '" + *f + "' must be a plain file name", V);
  require(c.outputs.echo_csv != c.outputs.spectrum_csv &&
              c.outputs.echo_csv != c.outputs.summary_json &&
              c.outputs.spectrum_csv != c.outputs.summary_json,
          "outputs: file names must be distinct", V);
  return c;
}

/// Parse and validate a YAML document held in memory.
inline ScenarioConfig load_scenario_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::ConfigParse, std::string("yaml: ") + e.what());
  }
  return validate(parse_scenario(root));
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open config '" + path.string() + "'", ErrorKind::Io);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario_string(buf.str());
}

// ---------------------------------------------------------------------------
// Serialization of configs
// ---------------------------------------------------------------------------

namespace detail {

// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline const char* window_name(Window w) { return w == Window::Hann ? "hann" : "none"; }

}  // namespace detail

/// Tree form of a config, shared by the JSON summary and the YAML export.
inline Json config_tree(const ScenarioConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["spin"] = c.spin.to_string();
  j["seed"] = c.seed;
  j["units"] = c.units == Units::Mhz ? "MHz" : "normalized";
  if (const auto* syn = std::get_if<SyntheticSpec>(&c.bath)) {
    Json s;
    s["n"] = syn->n;
    s["theta_p"] = syn->theta_p.text;
    s["da_max"] = syn->da_max;
    if (syn->a_mean_mhz) s["a_mean_mhz"] = *syn->a_mean_mhz;
    j["bath"]["synthetic"] = s;
  } else {
    const auto& g = std::get<GeometrySpec>(c.bath);
    Json s;
    if (g.geometry.kind == GeometryKind::Donor) {
      s["kind"] = "donor";
      s["l0_nm"] = g.geometry.l0_nm;
    } else {
      s["kind"] = "disk";
      s["radius_nm"] = g.geometry.radius_nm;
      s["height_nm"] = g.geometry.height_nm;
    }
    s["rho"] = g.geometry.rho;
    s["a_total_ueV"] = g.geometry.a_total_uev;
    s["theta_p"] = g.theta_p.text;
    if (g.n_eff) s["n_eff"] = *g.n_eff;
    if (g.lattice_spacing_nm) s["lattice_spacing_nm"] = *g.lattice_spacing_nm;
    j["bath"]["geometry"] = s;
  }
  j["qi"] = {{"fq_mean_ratio", c.qi.fq_mean_ratio}, {"eta", c.qi.eta}, {"dfq_max", c.qi.dfq_max}};
  j["grid"] = {{"t_max", c.grid.t_max.text}, {"n_points", c.grid.n_points}};
  j["spectrum"] = {{"window", detail::window_name(c.spectrum.window)},
                   {"db_floor", c.spectrum.db_floor},
                   {"width_threshold_db", c.spectrum.width_threshold_db}};
  j["fit"] = {{"enabled", c.fit.enabled}, {"mask", c.fit.mask}};
  j["outputs"] = {{"echo_csv", c.outputs.echo_csv},
                  {"spectrum_csv", c.outputs.spectrum_csv},
                  {"summary_json", c.outputs.summary_json}};
  return j;
}

namespace detail {

inline void emit(YAML::Emitter& out, const Json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_string()) {
    out << j.get<std::string>();
  } else if (j.is_boolean()) {
    out << (j.get<bool>() ? "true" : "false");
  } else if (j.is_number_float()) {
    out << shortest(j.get<double>());
  } else if (j.is_number()) {
    out << j.dump();
  } else {
    out << YAML::Null;
  }
}

}  // namespace detail

inline std::string to_yaml(const ScenarioConfig& c) {
  YAML::Emitter out;
  detail::emit(out, config_tree(c));
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct BathInfo {
  std::string kind;                 // synthetic | donor | disk
  std::optional<double> a_mean_mhz;  // absent for purely normalized synthetic baths
  std::optional<std::size_t> candidates;
  std::optional<std::size_t> target;
  std::optional<double> normalization;
  std::optional<double> lattice_spacing_nm;
  std::optional<std::string> warning;
};

struct BuiltBath {
  Bath bath;
  BathInfo info;
};

inline BuiltBath build_bath(const ScenarioConfig& c) {
  const SamplingConfig sc = sampling_config(c);
  if (const auto* syn = std::get_if<SyntheticSpec>(&c.bath)) {
    auto bath = sample_bath(sc, c.spin, syn->a_mean_mhz.value_or(1.0));
    BathInfo info;
    info.kind = "synthetic";
    // Normalized time uses the sampled mean, not the nominal one.
    if (syn->a_mean_mhz) info.a_mean_mhz = bath.a_mean();
    return {std::move(bath), info};
  }
  const auto& g = std::get<GeometrySpec>(c.bath);
  auto r = build_realistic(g.geometry, c.spin, sc);
  BathInfo info;
  info.kind = g.geometry.kind == GeometryKind::Donor ? "donor" : "disk";
  info.a_mean_mhz = r.bath.a_mean();
  info.candidates = r.candidates;
  info.target = r.target;
  info.normalization = r.normalization;
  info.lattice_spacing_nm = g.geometry.lattice_spacing_nm;
  info.warning = r.warning;
  return {std::move(r.bath), info};
}

struct RunResult {
  ScenarioConfig config;
  Bath bath;
  BathInfo info;
  EchoSeries echo;
  Spectrum spectrum;
  std::optional<double> half_width;  // normalized time
  double spectral_width = 0.0;       // normalized frequency, at the config threshold
  std::optional<FitResult> fit;
  std::string fit_error;
  unsigned threads = 1;
  double wall_time_s = 0.0;
};

/// Everything except writing files.
inline RunResult simulate(const ScenarioConfig& c, unsigned threads = 0) {
  const auto start = std::chrono::steady_clock::now();
  auto built = build_bath(c);
  const auto grid = TimeGrid::uniform(c.grid.t_max.value, c.grid.n_points);
  const unsigned used = resolve_threads(threads);
  auto echo = loschmidt_echo(built.bath, grid, {.threads = used});
  auto spec = power_spectrum(echo, {c.spectrum.window, c.spectrum.db_floor});

  std::optional<double> hw;
  try {
    hw = first_decay_halfwidth(echo);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Numerical) throw;
  }
  const double width = spectral_width(spec, c.spectrum.width_threshold_db);

  std::optional<FitResult> fit;
  std::string fit_error;
  if (c.fit.enabled) {
    try {
      fit = fit_phenomenological(echo, built.bath.size(), c.spin,
                                 built.bath.normalized_a_variance(), {.mask = c.fit.mask});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      fit_error = e.what();
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return RunResult{c,   std::move(built.bath), std::move(built.info), std::move(echo),
                   std::move(spec), hw,        width,                  fit,
                   fit_error, used, elapsed};
}

namespace detail {

inline void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

/// t_norm, M, log10_M, and t_us when the run reports physical units.
inline std::string echo_csv(const RunResult& r) {
  const bool mhz = r.config.units == Units::Mhz;
  const double a = r.info.a_mean_mhz.value_or(1.0);
  std::string out = mhz ? "t_norm,M,log10_M,t_us\n" : "t_norm,M,log10_M\n";
  out.reserve(out.size() + r.echo.m.size() * 80);
  for (std::size_t k = 0; k < r.echo.m.size(); ++k) {
    detail::put(out, r.echo.grid[k]);
    out += ',';
    detail::put(out, r.echo.m[k]);
    out += ',';
    detail::put(out, r.echo.log_m[k] / std::numbers::ln10);
    if (mhz) {
      out += ',';
      detail::put(out, units::normalized_to_us(r.echo.grid[k], a));
    }
    out += '\n';
  }
  return out;
}

/// Non-negative half of the (symmetric) spectrum: f_norm, power_db[, f_mhz].
inline std::string spectrum_csv(const RunResult& r) {
  const bool mhz = r.config.units == Units::Mhz;
  const double a = r.info.a_mean_mhz.value_or(1.0);
  std::string out = mhz ? "f_norm,power_db,f_mhz\n" : "f_norm,power_db\n";
  for (std::size_t i = r.spectrum.dc_index(); i < r.spectrum.freqs.size(); ++i) {
    detail::put(out, r.spectrum.freqs[i]);
    out += ',';
    detail::put(out, r.spectrum.power_db[i]);
    if (mhz) {
      out += ',';
      detail::put(out, units::normalized_to_mhz(r.spectrum.freqs[i], a));
    }
    out += '\n';
  }
  return out;
}

inline Json summary_json(const RunResult& r) {
  using detail::optional_number;
  const auto& a_mhz = r.info.a_mean_mhz;
  auto to_mhz = [&](double f) -> std::optional<double> {
    return a_mhz ? std::optional(units::normalized_to_mhz(f, *a_mhz)) : std::nullopt;
  };
  auto to_us = [&](std::optional<double> t) -> std::optional<double> {
    return a_mhz && t ? std::optional(units::normalized_to_us(*t, *a_mhz)) : std::nullopt;
  };

  Json j;
  j["engine_version"] = LOSCHMIDT_VERSION;
  j["name"] = r.config.name;
  j["config"] = config_tree(r.config);

  Json b;
  b["kind"] = r.info.kind;
  b["n"] = r.bath.size();
  b["spin"] = r.bath.spin().to_string();
  b["a_mean_normalized"] = 1.0;
  b["a_mean_mhz"] = optional_number(a_mhz);
  b["a_mean_ueV"] = optional_number(a_mhz ? std::optional(units::mhz_to_micro_ev(*a_mhz))
                                          : std::nullopt);
  b["fq_mean_ratio"] = r.bath.fq_mean() / r.bath.a_mean();
  b["fq_mean_mhz"] = optional_number(a_mhz ? std::optional(r.bath.fq_mean()) : std::nullopt);
  b["sigma2_normalized"] = r.bath.normalized_a_variance();
  if (r.info.target) {
    b["target_n_eff"] = *r.info.target;
    b["candidates"] = *r.info.candidates;
    b["normalization"] = *r.info.normalization;
    b["lattice_spacing_nm"] = *r.info.lattice_spacing_nm;
  }
  b["warning"] = r.info.warning ? Json(*r.info.warning) : Json(nullptr);
  j["bath"] = b;

  j["echo"] = {{"points", r.echo.m.size()},
               {"t_max_normalized", r.echo.grid.t_max()},
               {"half_width_normalized", optional_number(r.half_width)},
               {"half_width_us", optional_number(to_us(r.half_width))}};

  j["spectrum"] = {{"window", detail::window_name(r.config.spectrum.window)},
                   {"df_normalized", r.spectrum.df},
                   {"threshold_db", r.config.spectrum.width_threshold_db},
                   {"width_normalized", r.spectral_width},
                   {"width_mhz", optional_number(to_mhz(r.spectral_width))}};

  if (r.fit) {
    j["fit"] = {{"alpha_p", r.fit->alpha_p},
                {"beta_p", r.fit->beta_p},
                {"sigma2", r.fit->sigma2},
                {"residual_log10", r.fit->residual},
                {"converged", r.fit->converged},
                {"degenerate", r.fit->degenerate},
                {"samples_used", r.fit->samples_used}};
  } else if (!r.fit_error.empty()) {
    j["fit"] = {{"error", r.fit_error}};
  } else {
    j["fit"] = nullptr;
  }
  j["threads"] = r.threads;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

/// Writes the three artifacts through temporary files and renames them into
/// place only after all writes succeeded.
inline void write_artifacts(const RunResult& r, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, "cannot create output directory '" + out_dir.string() + "': " + ec.message(),
          ErrorKind::Io);

  const std::vector<std::pair<fs::path, std::string>> files = {
      {out_dir / r.config.outputs.echo_csv, echo_csv(r)},
      {out_dir / r.config.outputs.spectrum_csv, spectrum_csv(r)},
      {out_dir / r.config.outputs.summary_json, summary_json(r).dump(2) + "\n"},
  };
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [path, content] : files) {
    fs::path tmp = path;
    tmp += ".partial";
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(temps[i], files[i].first, ec);
    if (ec) {
      cleanup();
      fail(ErrorKind::Io, "cannot move '" + files[i].first.string() + "' into place");
    }
  }
}

inline RunResult run_scenario(const ScenarioConfig& c, unsigned threads,
                              const std::filesystem::path& out_dir) {
  auto r = simulate(c, threads);
  write_artifacts(r, out_dir);
  return r;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

struct Preset {
  std::string name;
  std::string description;
  std::vector<ScenarioConfig> variants;
};

namespace detail {

struct SyntheticArgs {
  std::string name;
  int two_i = 1;
  std::size_t n = 1000;
  const char* theta_p = "pi";
  double da_max = 0.025;
  double fq = 0.0;
  const char* t_max = "3.5pi";
  std::size_t points = 16385;
  bool fit = false;
};

inline PiValue pi_value(const char* text) { return parse_pi_value(text, "preset"); }

inline ScenarioConfig synthetic_variant(const SyntheticArgs& a) {
  ScenarioConfig c;
  c.name = a.name;
  c.spin = SpinLength(a.two_i);
  c.seed = 1;
  SyntheticSpec s;
  s.n = a.n;
  s.theta_p = pi_value(a.theta_p);
  s.da_max = a.da_max;
  c.bath = s;
  if (a.fq > 0.0) c.qi = {a.fq, 0.5, 0.2};
  c.grid = {pi_value(a.t_max), a.points};
  c.fit.enabled = a.fit;
  std::ostringstream d;
  d << "N=" << a.n << ", I=" << c.spin.to_string() << ", theta_p=" << a.theta_p
    << ", dA_max=" << shortest(a.da_max) << "A";
  if (a.fq > 0.0) d << ", fQ/A=" << shortest(a.fq) << ", eta=0.5";
  c.description = d.str();
  return validate(c);
}

struct RealisticArgs {
  std::string name;
  bool donor = true;
  int two_i = 1;
  const char* theta_p = "pi";
  double fq = 0.0;
};

inline ScenarioConfig realistic_variant(const RealisticArgs& a) {
  ScenarioConfig c;
  c.name = a.name;
  c.spin = SpinLength(a.two_i);
  c.seed = 1;
  c.units = Units::Mhz;
  GeometrySpec g;
  if (a.donor) {
    g.geometry.kind = GeometryKind::Donor;
    g.geometry.l0_nm = 5.0;
    g.geometry.rho = 0.05;
    g.geometry.a_total_uev = 0.141;
    g.n_eff = 100.0;
    c.grid = {pi_value("20pi"), 16385};
  } else {
    g.geometry.kind = GeometryKind::DiskDot;
    g.geometry.radius_nm = 12.5;
    g.geometry.height_nm = 3.0;
    g.geometry.rho = 1.0;
    g.geometry.a_total_uev = 70.856;
    g.n_eff = 10000.0;
    c.grid = {pi_value("2"), 16384};
  }
  g.theta_p = pi_value(a.theta_p);
  c.bath = g;
  if (a.fq > 0.0) c.qi = {a.fq, 0.5, 0.2};
  std::ostringstream d;
  d << (a.donor ? "donor, N_eff=100" : "quantum dot, N_eff=10000") << ", I=" << c.spin.to_string()
    << ", theta_p=" << a.theta_p << ", fQ/A=" << shortest(a.fq);
  c.description = d.str();
  return validate(c);
}

}  // namespace detail

inline std::vector<Preset> presets() {
  using detail::realistic_variant;
  using detail::synthetic_variant;
  std::vector<Preset> out;

  out.push_back({"fig1", "echo trace and size dependence, I=1/2, dA_max = 0.025A, unpolarized",
                 {synthetic_variant({.name = "fig1_topN1000", .n = 1000, .fit = true}),
                  synthetic_variant({.name = "fig1_N100", .n = 100, .fit = true}),
                  synthetic_variant({.name = "fig1_N10000", .n = 10000, .fit = true})}});

  out.push_back({"fig2_top", "initial polarization, N=100, I=1/2, dA_max = 0.025A",
                 {synthetic_variant({.name = "fig2_top_unpolarized", .n = 100}),
                  synthetic_variant({.name = "fig2_top_polarized", .n = 100, .theta_p = "pi/8"})}});

  out.push_back({"fig2_bottom", "hyperfine spread, N=100, I=1/2, unpolarized",
                 {synthetic_variant({.name = "fig2_bottom_da0125", .n = 100, .da_max = 0.0125}),
                  synthetic_variant({.name = "fig2_bottom_da025", .n = 100, .da_max = 0.025}),
                  synthetic_variant({.name = "fig2_bottom_da05", .n = 100, .da_max = 0.05})}});

  Preset fig3{"fig3", "spin-I comparison, N=1000, ΔA_max = Ā", {}};
  for (int two_i : {1, 3, 5, 9})
    fig3.variants.push_back(synthetic_variant({.name = "fig3_I" + std::to_string(two_i) + "2",
                                               .two_i = two_i,
                                               .n = 1000,
                                               .da_max = 1.0,
                                               .t_max = "2"}));
  out.push_back(std::move(fig3));

  for (int two_i : {3, 9}) {
    const std::string tag = "fig4_I" + std::to_string(two_i) + "2";
    Preset p{tag,
             "quadrupolar effect, I=" + SpinLength(two_i).to_string() +
                 ", N in {100, 1000}, dA_max = A, eta=0.5, dfQ_max = 0.2fQ",
             {}};
    for (std::size_t n : {100u, 1000u})
      for (const char* theta : {"pi", "pi/8"})
        for (double fq : {0.0, 1.0, 10.0, 100.0})
          p.variants.push_back(synthetic_variant(
              {.name = tag + "_N" + std::to_string(n) +
                       (std::string(theta) == "pi" ? "_unpol" : "_pol") + "_fq" +
                       detail::shortest(fq),
               .two_i = two_i,
               .n = n,
               .theta_p = theta,
               .da_max = 1.0,
               .fq = fq,
               .t_max = "10"}));
    out.push_back(std::move(p));
  }

  out.push_back(
      {"fig5_donor",
       "donor center spectra, N_eff=100, l0=5 nm, rho=0.05, sum A = 0.141 ueV",
       {realistic_variant({.name = "fig5_donor_I32_unpol_fq0", .two_i = 3}),
        realistic_variant({.name = "fig5_donor_I92_unpol_fq0", .two_i = 9}),
        realistic_variant(
                      {.name = "fig5_donor_I92_pol_fq0", .two_i = 9, .theta_p = "pi/8"}),
        realistic_variant({.name = "fig5_donor_I92_pol_fq10",
                                     .two_i = 9,
                                     .theta_p = "pi/8",
                                     .fq = 10.0})}});

  out.push_back(
      {"fig5_qdot",
       "lateral quantum dot spectra, N_eff=10000, R=12.5 nm, h=3 nm, sum A = 70.856 ueV",
       {realistic_variant({.name = "fig5_qdot_I32_fq0", .donor = false, .two_i = 3}),
        realistic_variant(
                      {.name = "fig5_qdot_I32_fq10", .donor = false, .two_i = 3, .fq = 10.0}),
        realistic_variant({.name = "fig5_qdot_I92_fq0", .donor = false, .two_i = 9}),
        realistic_variant(
                      {.name = "fig5_qdot_I92_fq10", .donor = false, .two_i = 9, .fq = 10.0})}});
  return out;
}

/// Scenario by preset variant name, or every variant of a preset group.
inline std::vector<ScenarioConfig> find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.variants;
    for (const auto& v : p.variants)
      if (v.name == name) return {v};
  }
  fail(ErrorKind::InvalidArgument, "unknown preset '" + name + "'");
}

}  // namespace loschmidt::scenario
