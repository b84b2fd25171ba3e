#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rydopt/model.hpp"

namespace rydopt {

// Hardware-facing pulse constraints. Amplitudes are enforced by saturation
// inside synthesis, so the optimizer only ever sees feasible pulses. Omega
// endpoints are pinned to zero by a multiplicative envelope over one rise
// time; optional detuning endpoints by additive pinning over one rise time.
struct ControlConstraints {
  double omega_max = mhz_to_rad_us(0.4);   // rad/us
  double delta_bound = mhz_to_rad_us(2.0); // rad/us, symmetric
  double omega_bandwidth_mhz = 8.3;        // Fourier cutoff for Omega(t)
  double delta_bandwidth_mhz = 0.5;        // Fourier cutoff for Delta(t)
  std::optional<double> delta_start;       // rad/us
  std::optional<double> delta_end;         // rad/us

  double omega_rise_time() const { return 0.5 / omega_bandwidth_mhz; }  // us
  double delta_rise_time() const { return 0.5 / delta_bandwidth_mhz; }  // us
};

struct FourierTerm {
  double freq_mhz = 0.0;
  double a_sin = 0.0;  // rad/us
  double a_cos = 0.0;  // rad/us
};

struct GuessPulse {
  enum class Kind { Zero, FlatDelta, Chirp };
  Kind kind = Kind::Zero;
  // Chirp: Omega ramps to omega_peak over `ramp` us and back down at the end,
  // Delta sweeps linearly delta_start -> delta_end.
  double omega_peak = 0.0;   // rad/us
  double delta_start = 0.0;  // rad/us
  double delta_end = 0.0;    // rad/us
  double ramp = 0.5;         // us
  // FlatDelta: Omega = 0, Delta = delta_level.
  double delta_level = 0.0;  // rad/us
};

// Guess pulse dressed with the active randomized Fourier basis plus the
// drift frozen from earlier super-iterations.
struct PulseParams {
  double duration = 0.0;  // us
  GuessPulse guess;
  std::vector<double> omega_freqs_mhz;
  std::vector<double> delta_freqs_mhz;
  // [omega A.. , omega B.. , delta A.. , delta B..], amplitudes in rad/us.
  Eigen::VectorXd coeffs;
  std::vector<FourierTerm> omega_drift;
  std::vector<FourierTerm> delta_drift;

  int coeff_count() const {
    return 2 * static_cast<int>(omega_freqs_mhz.size() + delta_freqs_mhz.size());
  }
};

struct SampledPulse {
  double dt = 1e-3;  // us
  std::vector<double> omega;  // rad/us, samples at t_j = j*dt including both ends
  std::vector<double> delta;  // rad/us

  int n_steps() const { return static_cast<int>(omega.size()) - 1; }
  double duration() const { return dt * n_steps(); }
};

// n_freqs frequencies in (0, bandwidth], one jittered draw per equal stratum,
// deterministic per seed. `duration` is accepted for prescription parity but
// the stratified draw depends only on the cutoff.
std::vector<double> draw_basis(std::uint64_t seed, int n_freqs, double bandwidth_mhz,
                               double duration);

SampledPulse synthesize(const PulseParams& params, const ControlConstraints& constraints,
                        double dt);

// Quasi-adiabatic baseline: smooth Omega ramp to omega_peak and back, linear
// detuning sweep. Shares the synthesis/constraint path with optimized pulses.
SampledPulse linear_chirp_reference(double duration, double delta_start, double delta_end,
                                    double omega_peak, const ControlConstraints& constraints,
                                    double dt);

// CSV exchange format: t_us, omega_over_2pi_MHz, delta_over_2pi_MHz.
void write_pulse_csv(const SampledPulse& pulse, const std::string& path);
SampledPulse read_pulse_csv(const std::string& path);

// 10%-90% rise time of the leading edge, us; diagnostic for reports.
double rise_time(const std::vector<double>& samples, double dt);

}  // namespace rydopt
