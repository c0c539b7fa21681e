#include "rabi/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "rabi/atomics.hpp"
#include "rabi/error.hpp"

namespace rabi {

std::vector<double> Axis::values() const {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    v[i] = points == 1 ? min : min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  if (points > 1) v.back() = max;
  return v;
}

Window leak_window() { return Window{772.0, 1.0, 0.1, 0.0}; }

const char* to_string(ScanKind kind) {
  switch (kind) {
    case ScanKind::area_delay: return "area_delay";
    case ScanKind::area: return "area";
    case ScanKind::rb_energy: return "rb_energy";
  }
  return "?";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const auto mark = node.Mark();
    if (mark.is_null()) throw ConfigError(fmt::format("{}: {}", source_, message));
    throw ConfigError(fmt::format("{}:{}:{}: {}", source_, mark.line + 1, mark.column + 1, message));
  }

  void expect_map(const YAML::Node& node, const std::string& path,
                  std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", path));
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        fail(kv.first, fmt::format("unknown key '{}' in '{}' (allowed: {})", key, path,
                                   fmt::join(keys, ", ")));
      }
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a number", path));
    double value = 0.0;
    if (!YAML::convert<double>::decode(node, value) || !std::isfinite(value)) {
      fail(node, fmt::format("'{}' must be a finite number (got '{}')", path, node.Scalar()));
    }
    return value;
  }

  double positive(const YAML::Node& node, const std::string& path) const {
    const double v = number(node, path);
    if (!(v > 0.0)) fail(node, fmt::format("'{}' must be > 0 (got {})", path, v));
    return v;
  }

  long integer(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be an integer", path));
    long value = 0;
    if (!YAML::convert<long>::decode(node, value)) {
      fail(node, fmt::format("'{}' must be an integer (got '{}')", path, node.Scalar()));
    }
    return value;
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    bool value = false;
    if (!node.IsScalar() || !YAML::convert<bool>::decode(node, value)) {
      fail(node, fmt::format("'{}' must be true or false", path));
    }
    return value;
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a string", path));
    return node.Scalar();
  }

  Axis axis(const YAML::Node& node, const std::string& path) const {
    expect_map(node, path, {"min", "max", "points"});
    for (const char* key : {"min", "max", "points"}) {
      if (!node[key]) fail(node, fmt::format("'{}.{}' is required", path, key));
    }
    Axis a;
    a.min = number(node["min"], path + ".min");
    a.max = number(node["max"], path + ".max");
    const long points = integer(node["points"], path + ".points");
    if (points < 2) fail(node["points"], fmt::format("'{}.points' must be >= 2 (got {})", path, points));
    if (points > 1000000) fail(node["points"], fmt::format("'{}.points' is unreasonably large", path));
    a.points = static_cast<std::size_t>(points);
    if (!(a.max > a.min)) fail(node, fmt::format("'{}': max must exceed min", path));
    return a;
  }

 private:
  std::string source_;
};

cplx parse_weight(const Reader& r, const YAML::Node& node, const std::string& path) {
  if (node.IsSequence()) {
    if (node.size() != 2) r.fail(node, fmt::format("'{}' must be a number or [re, im]", path));
    return {r.number(node[0], path + "[0]"), r.number(node[1], path + "[1]")};
  }
  return r.number(node, path);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  const Reader r(source);
  if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: empty configuration", source));
  r.expect_map(root, "<root>",
               {"schema_version", "preset", "k_d1_dipole_Cm", "spectrum", "carrier_nm", "mask", "scan",
                "probe", "averaging", "prepulse", "numerics"});

  ExperimentConfig cfg;
  if (!root["schema_version"]) r.fail(root, "'schema_version' is required");
  cfg.schema_version = static_cast<int>(r.integer(root["schema_version"], "schema_version"));
  if (cfg.schema_version != config_schema_version) {
    r.fail(root["schema_version"], fmt::format("unsupported schema_version {} (this build reads {})",
                                               cfg.schema_version, config_schema_version));
  }

  if (!root["preset"]) r.fail(root, "'preset' is required");
  cfg.preset = r.text(root["preset"], "preset");
  if (root["k_d1_dipole_Cm"]) cfg.k_d1_dipole = r.positive(root["k_d1_dipole_Cm"], "k_d1_dipole_Cm");
  std::optional<LevelSystem> system;
  try {
    system.emplace(make_preset(cfg.preset, PresetOptions{cfg.k_d1_dipole}));
  } catch (const ConfigError& e) {
    r.fail(root["preset"], e.what());
  }

  if (const auto s = root["spectrum"]) {
    r.expect_map(s, "spectrum", {"center_nm", "fwhm_nm", "energy_J"});
    if (s["center_nm"]) cfg.spectrum.center_nm = r.positive(s["center_nm"], "spectrum.center_nm");
    if (s["fwhm_nm"]) cfg.spectrum.fwhm_nm = r.positive(s["fwhm_nm"], "spectrum.fwhm_nm");
    if (s["energy_J"]) cfg.spectrum.energy_J = r.positive(s["energy_J"], "spectrum.energy_J");
  } else {
    r.fail(root, "'spectrum' is required");
  }
  if (root["carrier_nm"]) cfg.carrier_nm = r.positive(root["carrier_nm"], "carrier_nm");

  if (const auto m = root["mask"]) {
    r.expect_map(m, "mask", {"windows", "phase_poly"});
    if (const auto ws = m["windows"]) {
      if (!ws.IsSequence()) r.fail(ws, "'mask.windows' must be a list");
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto w = ws[i];
        const std::string path = fmt::format("mask.windows[{}]", i);
        r.expect_map(w, path, {"center_nm", "fwhm_nm", "relative_amplitude", "phase_rad"});
        if (!w["center_nm"] || !w["fwhm_nm"]) r.fail(w, fmt::format("'{}' needs center_nm and fwhm_nm", path));
        Window win;
        win.center_nm = r.positive(w["center_nm"], path + ".center_nm");
        win.fwhm_nm = r.positive(w["fwhm_nm"], path + ".fwhm_nm");
        if (const auto a = w["relative_amplitude"]) {
          if (a.IsScalar() && a.Scalar() == "auto") {
            cfg.auto_windows.push_back(i);
          } else {
            win.relative_amplitude = r.number(a, path + ".relative_amplitude");
            if (win.relative_amplitude < 0.0 || win.relative_amplitude > 1.0) {
              r.fail(a, fmt::format("'{}.relative_amplitude' must be in [0, 1] or 'auto'", path));
            }
          }
        }
        if (w["phase_rad"]) win.phase = r.number(w["phase_rad"], path + ".phase_rad");
        cfg.mask.windows.push_back(win);
      }
    }
    if (const auto p = m["phase_poly"]) {
      if (!p.IsSequence()) r.fail(p, "'mask.phase_poly' must be a list of coefficients");
      for (std::size_t i = 0; i < p.size(); ++i) {
        cfg.mask.phase_poly.push_back(r.number(p[i], fmt::format("mask.phase_poly[{}]", i)));
      }
    }
  }

  if (const auto s = root["scan"]) {
    r.expect_map(s, "scan", {"kind", "area_pi", "delay_fs", "energy_J", "bandwidths_nm"});
    if (!s["kind"]) r.fail(s, "'scan.kind' is required");
    const auto kind = r.text(s["kind"], "scan.kind");
    if (kind == "area_delay") {
      cfg.kind = ScanKind::area_delay;
    } else if (kind == "area") {
      cfg.kind = ScanKind::area;
    } else if (kind == "rb_energy") {
      cfg.kind = ScanKind::rb_energy;
    } else {
      r.fail(s["kind"], fmt::format("unknown scan kind '{}' (expected area_delay, area, rb_energy)", kind));
    }
    if (s["area_pi"]) cfg.area_pi = r.axis(s["area_pi"], "scan.area_pi");
    if (s["delay_fs"]) cfg.delay_fs = r.axis(s["delay_fs"], "scan.delay_fs");
    if (s["energy_J"]) cfg.energy_J = r.axis(s["energy_J"], "scan.energy_J");
    if (cfg.area_pi.min < 0.0) r.fail(s["area_pi"], "'scan.area_pi.min' must be >= 0");
    if (cfg.energy_J.min < 0.0) r.fail(s["energy_J"], "'scan.energy_J.min' must be >= 0");
    if (const auto b = s["bandwidths_nm"]) {
      if (!b.IsSequence()) r.fail(b, "'scan.bandwidths_nm' must be a list");
      for (std::size_t i = 0; i < b.size(); ++i) {
        cfg.bandwidths_nm.push_back(r.positive(b[i], fmt::format("scan.bandwidths_nm[{}]", i)));
      }
    }
    const bool two_level = system->excited_count() == 1;
    if (cfg.kind == ScanKind::rb_energy && !two_level) {
      r.fail(s["kind"], fmt::format("rb_energy scans need a single excited level; preset '{}' has {}",
                                    cfg.preset, system->excited_count()));
    }
    if (cfg.kind != ScanKind::rb_energy && system->excited_count() != 2) {
      r.fail(s["kind"], fmt::format("{} scans need two excited levels; preset '{}' has {}", kind,
                                    cfg.preset, system->excited_count()));
    }
  } else {
    r.fail(root, "'scan' is required");
  }

  if (const auto p = root["probe"]) {
    r.expect_map(p, "probe", {"path_weights", "nonlinearity_order", "duration_fwhm_fs"});
    if (const auto w = p["path_weights"]) {
      if (!w.IsSequence()) r.fail(w, "'probe.path_weights' must be a list");
      for (std::size_t i = 0; i < w.size(); ++i) {
        cfg.probe.path_weights.push_back(parse_weight(r, w[i], fmt::format("probe.path_weights[{}]", i)));
      }
    }
    if (p["nonlinearity_order"]) {
      cfg.probe.nonlinearity_order = static_cast<int>(r.integer(p["nonlinearity_order"], "probe.nonlinearity_order"));
    }
    if (p["duration_fwhm_fs"]) cfg.probe.duration_fwhm_fs = r.number(p["duration_fwhm_fs"], "probe.duration_fwhm_fs");
    try {
      validate(cfg.probe, *system);
    } catch (const ConfigError& e) {
      r.fail(p, e.what());
    }
  }

  if (const auto a = root["averaging"]) {
    r.expect_map(a, "averaging", {"diameter_ratio", "probe_order"});
    AveragingConfig avg;
    avg.probe_order = cfg.probe.nonlinearity_order;
    if (!a["diameter_ratio"]) r.fail(a, "'averaging.diameter_ratio' is required");
    avg.diameter_ratio = r.positive(a["diameter_ratio"], "averaging.diameter_ratio");
    if (a["probe_order"]) {
      avg.probe_order = static_cast<int>(r.integer(a["probe_order"], "averaging.probe_order"));
      if (avg.probe_order < 1) r.fail(a["probe_order"], "'averaging.probe_order' must be >= 1");
    }
    cfg.averaging = avg;
  }

  if (const auto p = root["prepulse"]) {
    r.expect_map(p, "prepulse", {"energy_fraction", "phase_rad"});
    PrepulseConfig pre;
    if (!p["energy_fraction"]) r.fail(p, "'prepulse.energy_fraction' is required");
    pre.energy_fraction = r.number(p["energy_fraction"], "prepulse.energy_fraction");
    if (pre.energy_fraction < 0.0 || pre.energy_fraction > 0.05) {
      r.fail(p["energy_fraction"], "'prepulse.energy_fraction' must be in [0, 0.05]");
    }
    if (const auto ph = p["phase_rad"]) {
      if (!(ph.IsScalar() && ph.Scalar() == "average")) pre.phase_rad = r.number(ph, "prepulse.phase_rad");
    }
    cfg.prepulse = pre;
  }

  if (const auto n = root["numerics"]) {
    r.expect_map(n, "numerics",
                 {"grid_points", "half_span_nm", "oversample", "rk4_step_fs", "supergauss_order",
                  "include_772nm_leak", "beam_area_cm2"});
    if (n["grid_points"]) {
      const long g = r.integer(n["grid_points"], "numerics.grid_points");
      if (g < 64 || (g & (g - 1)) != 0) r.fail(n["grid_points"], "'numerics.grid_points' must be a power of two >= 64");
      cfg.numerics.grid_points = static_cast<std::size_t>(g);
    }
    if (n["half_span_nm"]) cfg.numerics.half_span_nm = r.positive(n["half_span_nm"], "numerics.half_span_nm");
    if (n["oversample"]) {
      const long o = r.integer(n["oversample"], "numerics.oversample");
      if (o < 1 || o > 256) r.fail(n["oversample"], "'numerics.oversample' must be in [1, 256]");
      cfg.numerics.oversample = static_cast<std::size_t>(o);
    }
    if (n["rk4_step_fs"]) cfg.numerics.rk4_step_fs = r.positive(n["rk4_step_fs"], "numerics.rk4_step_fs");
    if (n["supergauss_order"]) {
      cfg.numerics.supergauss_order = static_cast<int>(r.integer(n["supergauss_order"], "numerics.supergauss_order"));
      if (cfg.numerics.supergauss_order < 1) r.fail(n["supergauss_order"], "'numerics.supergauss_order' must be >= 1");
    }
    if (n["include_772nm_leak"]) cfg.numerics.include_772nm_leak = r.boolean(n["include_772nm_leak"], "numerics.include_772nm_leak");
    if (n["beam_area_cm2"]) cfg.numerics.beam_area_cm2 = r.positive(n["beam_area_cm2"], "numerics.beam_area_cm2");
  }
  cfg.mask.order = cfg.numerics.supergauss_order;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

}  // namespace rabi
