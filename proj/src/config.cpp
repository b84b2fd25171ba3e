#include "rydopt/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rydopt/errors.hpp"

namespace rydopt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(key, "expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(key, "expected an integer");
  return j.at(key).get<int>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer()) {
    fail(key, "expected an integer seed");
  }
  return j.at(key).get<std::uint64_t>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(key, "expected a string");
  return j.at(key).get<std::string>();
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> known) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

}  // namespace

LatticeGeometry build_geometry(const GeometrySpec& spec) {
  switch (spec.shape) {
    case LatticeShape::Bar:
      return build_bar(spec.rows, spec.cols);
    case LatticeShape::CornerSquare:
      return build_corner_square(spec.side, spec.block);
    case LatticeShape::Custom:
      break;
  }
  throw ConfigError("build_geometry: custom geometries are API-only");
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  check_keys(j, "top level",
             {"model", "geometry", "filling", "seeds", "truncation", "constraints", "pulse",
              "target", "optimizer", "detection", "spectrum", "staircase", "output",
              "blockade_bound_a", "workers"});

  RunConfig cfg;
  cfg.model = default_model();

  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, "model", {"c6_mhz_um6", "lattice_spacing_um", "gamma_decay_per_us"});
    cfg.model.c6_over_hbar =
        mhz_to_rad_us(get_number(m, "c6_mhz_um6", rad_us_to_mhz(cfg.model.c6_over_hbar)));
    cfg.model.lattice_spacing = get_number(m, "lattice_spacing_um", cfg.model.lattice_spacing);
    cfg.model.gamma_decay = get_number(m, "gamma_decay_per_us", cfg.model.gamma_decay);
  }

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    check_keys(g, "geometry", {"shape", "rows", "cols", "side", "block"});
    const std::string shape = get_string(g, "shape", "bar");
    if (shape == "bar") {
      cfg.geometry.shape = LatticeShape::Bar;
    } else if (shape == "corner_square") {
      cfg.geometry.shape = LatticeShape::CornerSquare;
    } else {
      fail("geometry.shape", "expected 'bar' or 'corner_square', got '" + shape + "'");
    }
    cfg.geometry.rows = get_int(g, "rows", cfg.geometry.rows);
    cfg.geometry.cols = get_int(g, "cols", cfg.geometry.cols);
    cfg.geometry.side = get_int(g, "side", cfg.geometry.side);
    cfg.geometry.block = get_int(g, "block", cfg.geometry.block);
  }

  cfg.filling = get_number(j, "filling", cfg.filling);
  if (cfg.filling < 0.0 || cfg.filling > 1.0) fail("filling", "must be in [0, 1]");

  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    check_keys(s, "seeds", {"ensemble", "basis", "measure"});
    cfg.seed_ensemble = get_u64(s, "ensemble", cfg.seed_ensemble);
    cfg.seed_basis = get_u64(s, "basis", cfg.seed_basis);
    cfg.seed_measure = get_u64(s, "measure", cfg.seed_measure);
  }

  if (j.contains("truncation")) {
    const json& t = j["truncation"];
    check_keys(t, "truncation", {"kind", "k", "radius_a"});
    const std::string kind = get_string(t, "kind", "none");
    if (kind == "none") {
    } else if (kind == "max_excitations") {
      cfg.truncation.max_excitations = get_int(t, "k", 1);
    } else if (kind == "blockade_radius") {
      cfg.truncation.blockade_radius_um =
          get_number(t, "radius_a", 8.0) * cfg.model.lattice_spacing;
    } else {
      fail("truncation.kind", "expected none|max_excitations|blockade_radius");
    }
  }

  if (j.contains("constraints")) {
    const json& c = j["constraints"];
    check_keys(c, "constraints",
               {"omega_max_mhz", "delta_bound_mhz", "omega_bandwidth_mhz",
                "delta_bandwidth_mhz", "pin_delta_end_mhz", "pin_delta_start_mhz"});
    cfg.constraints.omega_max = mhz_to_rad_us(get_number(c, "omega_max_mhz", 0.4));
    cfg.constraints.delta_bound = mhz_to_rad_us(get_number(c, "delta_bound_mhz", 2.0));
    cfg.constraints.omega_bandwidth_mhz = get_number(c, "omega_bandwidth_mhz", 8.3);
    cfg.constraints.delta_bandwidth_mhz = get_number(c, "delta_bandwidth_mhz", 0.5);
    for (const char* key : {"pin_delta_end_mhz", "pin_delta_start_mhz"}) {
      if (!c.contains(key)) continue;
      const bool is_end = std::string(key) == "pin_delta_end_mhz";
      if (c.at(key).is_string()) {
        if (c.at(key).get<std::string>() != "critical") {
          fail(key, "expected a number in MHz or 'critical'");
        }
        (is_end ? cfg.pin_delta_end_critical : cfg.pin_delta_start_critical) = true;
      } else if (c.at(key).is_number()) {
        const double v = mhz_to_rad_us(c.at(key).get<double>());
        (is_end ? cfg.constraints.delta_end : cfg.constraints.delta_start) = v;
      } else if (!c.at(key).is_null()) {
        fail(key, "expected a number in MHz, 'critical', or null");
      }
    }
  }

  if (j.contains("pulse")) {
    const json& p = j["pulse"];
    check_keys(p, "pulse", {"duration_us", "dt_us", "guess", "chirp", "flat_delta_mhz"});
    cfg.pulse.duration = get_number(p, "duration_us", cfg.pulse.duration);
    cfg.pulse.dt = get_number(p, "dt_us", cfg.pulse.dt);
    if (cfg.pulse.duration <= 0.0) fail("pulse.duration_us", "must be positive");
    if (cfg.pulse.dt <= 0.0) fail("pulse.dt_us", "must be positive");
    const std::string guess = get_string(p, "guess", "zero");
    if (guess == "zero") {
      cfg.pulse.guess.kind = GuessPulse::Kind::Zero;
    } else if (guess == "flat_delta") {
      cfg.pulse.guess.kind = GuessPulse::Kind::FlatDelta;
      if (p.contains("flat_delta_mhz") && p.at("flat_delta_mhz").is_string()) {
        if (p.at("flat_delta_mhz").get<std::string>() != "critical") {
          fail("pulse.flat_delta_mhz", "expected a number or 'critical'");
        }
        cfg.pulse.flat_delta_critical = true;
      } else {
        cfg.pulse.guess.delta_level = mhz_to_rad_us(get_number(p, "flat_delta_mhz", 0.0));
      }
    } else if (guess == "chirp") {
      cfg.pulse.guess.kind = GuessPulse::Kind::Chirp;
      const json ch = p.value("chirp", json::object());
      check_keys(ch, "pulse.chirp",
                 {"delta_start_mhz", "delta_end_mhz", "omega_peak_mhz", "ramp_us"});
      cfg.pulse.guess.delta_start = mhz_to_rad_us(get_number(ch, "delta_start_mhz", -2.0));
      cfg.pulse.guess.delta_end = mhz_to_rad_us(get_number(ch, "delta_end_mhz", 2.0));
      cfg.pulse.guess.omega_peak = mhz_to_rad_us(get_number(ch, "omega_peak_mhz", 0.4));
      cfg.pulse.guess.ramp = get_number(ch, "ramp_us", 0.5);
    } else {
      fail("pulse.guess", "expected zero|flat_delta|chirp");
    }
  }

  if (j.contains("target")) {
    const json& t = j["target"];
    check_keys(t, "target",
               {"kind", "n_excitations", "theta_over_pi", "coefficients", "final_delta_mhz"});
    const std::string kind = get_string(t, "kind", "crystal");
    if (kind == "crystal") {
      cfg.target.target.kind = TargetState::Kind::Crystal;
      cfg.target.target.crystal_excitations = get_int(t, "n_excitations", -1);
    } else if (kind == "ghz") {
      cfg.target.target.kind = TargetState::Kind::Ghz;
      cfg.target.target.ghz_theta = kPi * get_number(t, "theta_over_pi", 0.5);
    } else if (kind == "symmetric") {
      cfg.target.target.kind = TargetState::Kind::Symmetric;
      if (!t.contains("coefficients") || !t.at("coefficients").is_array()) {
        fail("target.coefficients", "symmetric targets need a coefficient array");
      }
      for (const auto& v : t.at("coefficients")) {
        if (!v.is_number()) fail("target.coefficients", "expected numbers");
        cfg.target.target.symmetric_coeffs.push_back(v.get<double>());
      }
    } else {
      fail("target.kind", "expected crystal|ghz|symmetric");
    }
    if (t.contains("final_delta_mhz") && t.at("final_delta_mhz").is_number()) {
      cfg.target.final_delta = mhz_to_rad_us(t.at("final_delta_mhz").get<double>());
    }
  }

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    check_keys(o, "optimizer",
               {"n_realizations", "budget_per_super", "n_super_iterations", "n_freqs",
                "nm_tol", "initial_step_scale"});
    cfg.optimizer.n_realizations = get_int(o, "n_realizations", cfg.optimizer.n_realizations);
    cfg.optimizer.budget_per_super =
        get_int(o, "budget_per_super", cfg.optimizer.budget_per_super);
    cfg.optimizer.n_super_iterations =
        get_int(o, "n_super_iterations", cfg.optimizer.n_super_iterations);
    cfg.optimizer.n_freqs = get_int(o, "n_freqs", cfg.optimizer.n_freqs);
    cfg.optimizer.nm_tol = get_number(o, "nm_tol", cfg.optimizer.nm_tol);
    cfg.optimizer.initial_step_scale =
        get_number(o, "initial_step_scale", cfg.optimizer.initial_step_scale);
    if (cfg.optimizer.n_realizations < 1) fail("optimizer.n_realizations", "must be >= 1");
    if (cfg.optimizer.n_freqs < 1) fail("optimizer.n_freqs", "must be >= 1");
  }

  if (j.contains("detection")) {
    const json& d = j["detection"];
    check_keys(d, "detection",
               {"t_max_us", "dt_us", "grid_gamma", "grid_alpha", "n_shots", "unit_index",
                "omega_m_mhz"});
    cfg.detection.t_max = get_number(d, "t_max_us", cfg.detection.t_max);
    cfg.detection.dt = get_number(d, "dt_us", cfg.detection.dt);
    cfg.detection.grid_gamma = get_int(d, "grid_gamma", cfg.detection.grid_gamma);
    cfg.detection.grid_alpha = get_int(d, "grid_alpha", cfg.detection.grid_alpha);
    cfg.detection.n_shots = get_int(d, "n_shots", cfg.detection.n_shots);
    cfg.detection.unit_index = get_int(d, "unit_index", cfg.detection.unit_index);
    if (d.contains("omega_m_mhz") && d.at("omega_m_mhz").is_number()) {
      cfg.detection.omega_m = mhz_to_rad_us(d.at("omega_m_mhz").get<double>());
    }
  }

  if (j.contains("spectrum")) {
    const json& s = j["spectrum"];
    check_keys(s, "spectrum", {"delta_min_mhz", "delta_max_mhz", "n_points", "max_levels"});
    cfg.spectrum.delta_min = mhz_to_rad_us(get_number(s, "delta_min_mhz", -2.0));
    cfg.spectrum.delta_max = mhz_to_rad_us(get_number(s, "delta_max_mhz", 2.0));
    cfg.spectrum.n_points = get_int(s, "n_points", cfg.spectrum.n_points);
    cfg.spectrum.max_levels = get_int(s, "max_levels", cfg.spectrum.max_levels);
    if (cfg.spectrum.n_points < 1) fail("spectrum.n_points", "must be >= 1");
  }

  if (j.contains("staircase")) {
    const json& s = j["staircase"];
    check_keys(s, "staircase", {"n_min", "n_max"});
    cfg.staircase.n_min = get_int(s, "n_min", cfg.staircase.n_min);
    cfg.staircase.n_max = get_int(s, "n_max", cfg.staircase.n_max);
    if (cfg.staircase.n_min < 1 || cfg.staircase.n_max < cfg.staircase.n_min) {
      fail("staircase", "need 1 <= n_min <= n_max");
    }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"dir", "record_interval_us"});
    cfg.output_dir = get_string(o, "dir", cfg.output_dir);
    cfg.record_interval = get_number(o, "record_interval_us", cfg.record_interval);
  }

  cfg.blockade_bound_a = get_number(j, "blockade_bound_a", cfg.blockade_bound_a);
  cfg.workers = get_int(j, "workers", cfg.workers);
  if (cfg.workers < 1) fail("workers", "must be >= 1");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json canonical_json(const RunConfig& cfg) {
  json j;
  j["model"] = {{"c6_mhz_um6", rad_us_to_mhz(cfg.model.c6_over_hbar)},
                {"lattice_spacing_um", cfg.model.lattice_spacing},
                {"gamma_decay_per_us", cfg.model.gamma_decay}};
  json g;
  g["shape"] = cfg.geometry.shape == LatticeShape::Bar ? "bar" : "corner_square";
  if (cfg.geometry.shape == LatticeShape::Bar) {
    g["rows"] = cfg.geometry.rows;
    g["cols"] = cfg.geometry.cols;
  } else {
    g["side"] = cfg.geometry.side;
    g["block"] = cfg.geometry.block;
  }
  j["geometry"] = g;
  j["filling"] = cfg.filling;
  j["seeds"] = {{"ensemble", cfg.seed_ensemble},
                {"basis", cfg.seed_basis},
                {"measure", cfg.seed_measure}};
  json t;
  if (cfg.truncation.max_excitations) {
    t["kind"] = "max_excitations";
    t["k"] = *cfg.truncation.max_excitations;
  } else if (cfg.truncation.blockade_radius_um) {
    t["kind"] = "blockade_radius";
    t["radius_a"] = *cfg.truncation.blockade_radius_um / cfg.model.lattice_spacing;
  } else {
    t["kind"] = "none";
  }
  j["truncation"] = t;
  json c;
  c["omega_max_mhz"] = rad_us_to_mhz(cfg.constraints.omega_max);
  c["delta_bound_mhz"] = rad_us_to_mhz(cfg.constraints.delta_bound);
  c["omega_bandwidth_mhz"] = cfg.constraints.omega_bandwidth_mhz;
  c["delta_bandwidth_mhz"] = cfg.constraints.delta_bandwidth_mhz;
  if (cfg.pin_delta_end_critical) {
    c["pin_delta_end_mhz"] = "critical";
  } else if (cfg.constraints.delta_end) {
    c["pin_delta_end_mhz"] = rad_us_to_mhz(*cfg.constraints.delta_end);
  }
  if (cfg.pin_delta_start_critical) {
    c["pin_delta_start_mhz"] = "critical";
  } else if (cfg.constraints.delta_start) {
    c["pin_delta_start_mhz"] = rad_us_to_mhz(*cfg.constraints.delta_start);
  }
  j["constraints"] = c;
  json p;
  p["duration_us"] = cfg.pulse.duration;
  p["dt_us"] = cfg.pulse.dt;
  switch (cfg.pulse.guess.kind) {
    case GuessPulse::Kind::Zero:
      p["guess"] = "zero";
      break;
    case GuessPulse::Kind::FlatDelta:
      p["guess"] = "flat_delta";
      if (cfg.pulse.flat_delta_critical) {
        p["flat_delta_mhz"] = "critical";
      } else {
        p["flat_delta_mhz"] = rad_us_to_mhz(cfg.pulse.guess.delta_level);
      }
      break;
    case GuessPulse::Kind::Chirp:
      p["guess"] = "chirp";
      p["chirp"] = {{"delta_start_mhz", rad_us_to_mhz(cfg.pulse.guess.delta_start)},
                    {"delta_end_mhz", rad_us_to_mhz(cfg.pulse.guess.delta_end)},
                    {"omega_peak_mhz", rad_us_to_mhz(cfg.pulse.guess.omega_peak)},
                    {"ramp_us", cfg.pulse.guess.ramp}};
      break;
  }
  j["pulse"] = p;
  json tg;
  switch (cfg.target.target.kind) {
    case TargetState::Kind::Crystal:
      tg["kind"] = "crystal";
      tg["n_excitations"] = cfg.target.target.crystal_excitations;
      break;
    case TargetState::Kind::Ghz:
      tg["kind"] = "ghz";
      tg["theta_over_pi"] = cfg.target.target.ghz_theta / kPi;
      break;
    case TargetState::Kind::Symmetric:
      tg["kind"] = "symmetric";
      tg["coefficients"] = cfg.target.target.symmetric_coeffs;
      break;
    case TargetState::Kind::Explicit:
      tg["kind"] = "explicit";
      break;
  }
  if (cfg.target.final_delta) tg["final_delta_mhz"] = rad_us_to_mhz(*cfg.target.final_delta);
  j["target"] = tg;
  j["optimizer"] = {{"n_realizations", cfg.optimizer.n_realizations},
                    {"budget_per_super", cfg.optimizer.budget_per_super},
                    {"n_super_iterations", cfg.optimizer.n_super_iterations},
                    {"n_freqs", cfg.optimizer.n_freqs},
                    {"nm_tol", cfg.optimizer.nm_tol},
                    {"initial_step_scale", cfg.optimizer.initial_step_scale}};
  json d;
  d["t_max_us"] = cfg.detection.t_max;
  d["dt_us"] = cfg.detection.dt;
  d["grid_gamma"] = cfg.detection.grid_gamma;
  d["grid_alpha"] = cfg.detection.grid_alpha;
  d["n_shots"] = cfg.detection.n_shots;
  d["unit_index"] = cfg.detection.unit_index;
  if (cfg.detection.omega_m) d["omega_m_mhz"] = rad_us_to_mhz(*cfg.detection.omega_m);
  j["detection"] = d;
  j["spectrum"] = {{"delta_min_mhz", rad_us_to_mhz(cfg.spectrum.delta_min)},
                   {"delta_max_mhz", rad_us_to_mhz(cfg.spectrum.delta_max)},
                   {"n_points", cfg.spectrum.n_points},
                   {"max_levels", cfg.spectrum.max_levels}};
  j["staircase"] = {{"n_min", cfg.staircase.n_min}, {"n_max", cfg.staircase.n_max}};
  j["output"] = {{"dir", cfg.output_dir}, {"record_interval_us", cfg.record_interval}};
  j["blockade_bound_a"] = cfg.blockade_bound_a;
  j["workers"] = cfg.workers;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string dump = canonical_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rydopt
