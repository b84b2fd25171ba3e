#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rydopt/basis.hpp"
#include "rydopt/lattice.hpp"
#include "rydopt/observables.hpp"
#include "rydopt/optimizer.hpp"
#include "rydopt/pulse.hpp"

namespace rydopt {

// Declarative run description. Config files carry experiment-facing units
// (MHz, us, um, lattice constants); everything here is already converted to
// internal units except where a value must be resolved against the concrete
// geometry ("critical" detunings).
struct GeometrySpec {
  LatticeShape shape = LatticeShape::Bar;
  int rows = 3, cols = 8;    // bar
  int side = 10, block = 2;  // corner square
};

struct PulseSettings {
  double duration = 4.0;  // us
  double dt = 1e-3;       // us
  GuessPulse guess;
  bool flat_delta_critical = false;  // FlatDelta level = critical detuning
};

struct TargetSpec {
  TargetState target;
  std::optional<double> final_delta;  // rad/us; default depends on the guess
};

struct OptimizerSettings {
  int n_realizations = 50;
  int budget_per_super = 1000;
  int n_super_iterations = 5;
  int n_freqs = 3;
  double nm_tol = 1e-10;
  double initial_step_scale = 0.4;
};

struct DetectionSettings {
  double t_max = 10.0;  // us
  double dt = 1e-3;     // us
  int grid_gamma = 11;
  int grid_alpha = 12;
  int n_shots = 10000;
  int unit_index = 0;
  std::optional<double> omega_m;  // rad/us; default: the Rabi cap
};

struct SpectrumSettings {
  double delta_min = mhz_to_rad_us(-2.0);
  double delta_max = mhz_to_rad_us(2.0);
  int n_points = 201;
  int max_levels = 0;  // 0 = all
};

struct StaircaseSettings {
  int n_min = 4;
  int n_max = 14;
};

struct RunConfig {
  PhysicalModel model;
  GeometrySpec geometry;
  double filling = 1.0;
  std::uint64_t seed_ensemble = 12345;
  std::uint64_t seed_basis = 777;
  std::uint64_t seed_measure = 99;
  Truncation truncation;
  ControlConstraints constraints;
  bool pin_delta_end_critical = false;
  bool pin_delta_start_critical = false;
  PulseSettings pulse;
  TargetSpec target;
  OptimizerSettings optimizer;
  DetectionSettings detection;
  SpectrumSettings spectrum;
  StaircaseSettings staircase;
  std::string output_dir = "out";
  double record_interval = 0.01;  // us
  double blockade_bound_a = 8.0;
  int workers = 1;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical echo with every default materialized, in config-file units.
// Reparsing it reproduces the run bit-for-bit.
nlohmann::json canonical_json(const RunConfig& config);

// FNV-1a over the canonical dump; the manifest's reproducibility key.
std::string config_hash(const RunConfig& config);

LatticeGeometry build_geometry(const GeometrySpec& spec);

}  // namespace rydopt
