#include "rydopt/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rydopt/errors.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

namespace {

// C1 half-wave ramp: 0 at u<=0, 1 at u>=1.
double smooth01(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double s = std::sin(0.5 * kPi * u);
  return s * s;
}

double eval_terms(const std::vector<FourierTerm>& terms, double t) {
  double v = 0.0;
  for (const auto& term : terms) {
    const double arg = kTwoPi * term.freq_mhz * t;  // MHz * us is dimensionless
    v += term.a_sin * std::sin(arg) + term.a_cos * std::cos(arg);
  }
  return v;
}

struct GuessEval {
  double omega;
  double delta;
};

GuessEval eval_guess(const GuessPulse& g, double t, double tau) {
  switch (g.kind) {
    case GuessPulse::Kind::Zero:
      return {0.0, 0.0};
    case GuessPulse::Kind::FlatDelta:
      return {0.0, g.delta_level};
    case GuessPulse::Kind::Chirp: {
      const double ramp = std::max(g.ramp, 1e-9);
      const double up = smooth01(t / ramp);
      const double down = smooth01((tau - t) / ramp);
      const double omega = g.omega_peak * std::min(up, down);
      const double delta =
          g.delta_start + (g.delta_end - g.delta_start) * (tau > 0 ? t / tau : 0.0);
      return {omega, delta};
    }
  }
  return {0.0, 0.0};
}

void check_cutoff(const std::vector<double>& freqs, double cutoff, const char* field) {
  for (double f : freqs) {
    if (f > cutoff + 1e-12) {
      throw ConstraintError(std::string("synthesize: ") + field + " basis frequency " +
                            std::to_string(f) + " MHz exceeds the " +
                            std::to_string(cutoff) + " MHz cutoff");
    }
    if (f <= 0.0) {
      throw ConstraintError(std::string("synthesize: ") + field +
                            " basis frequency must be positive");
    }
  }
}

}  // namespace

std::vector<double> draw_basis(std::uint64_t seed, int n_freqs, double bandwidth_mhz,
                               double duration) {
  (void)duration;
  if (n_freqs < 1) throw UsageError("draw_basis: n_freqs must be at least 1");
  if (bandwidth_mhz <= 0.0) throw UsageError("draw_basis: bandwidth must be positive");
  Rng rng(seed);
  std::vector<double> freqs(n_freqs);
  for (int k = 0; k < n_freqs; ++k) {
    // Stratified jitter keeps the draw uniform over (0, cutoff] while
    // guaranteeing coverage of distinct harmonics.
    freqs[k] = bandwidth_mhz * (k + rng.uniform01_open_low()) / n_freqs;
  }
  return freqs;
}

SampledPulse synthesize(const PulseParams& params, const ControlConstraints& constraints,
                        double dt) {
  if (params.duration <= 0.0) throw UsageError("synthesize: duration must be positive");
  if (dt <= 0.0) throw UsageError("synthesize: dt must be positive");
  if (params.coeffs.size() != params.coeff_count()) {
    throw UsageError("synthesize: coefficient vector does not match the basis layout");
  }
  check_cutoff(params.omega_freqs_mhz, constraints.omega_bandwidth_mhz, "omega");
  check_cutoff(params.delta_freqs_mhz, constraints.delta_bandwidth_mhz, "delta");
  for (const auto& t : params.omega_drift) {
    if (t.freq_mhz > constraints.omega_bandwidth_mhz + 1e-12) {
      throw ConstraintError("synthesize: omega drift frequency exceeds the cutoff");
    }
  }
  for (const auto& t : params.delta_drift) {
    if (t.freq_mhz > constraints.delta_bandwidth_mhz + 1e-12) {
      throw ConstraintError("synthesize: delta drift frequency exceeds the cutoff");
    }
  }

  const double tau = params.duration;
  const int n = std::max(1, static_cast<int>(std::llround(tau / dt)));
  const int n_om = static_cast<int>(params.omega_freqs_mhz.size());
  const int n_de = static_cast<int>(params.delta_freqs_mhz.size());

  SampledPulse pulse;
  pulse.dt = dt;
  pulse.omega.resize(n + 1);
  pulse.delta.resize(n + 1);

  const double t_rise_om = constraints.omega_rise_time();
  const double t_rise_de = constraints.delta_rise_time();

  // Raw delta at the endpoints, needed for the additive pinning offsets.
  auto delta_raw = [&](double t) {
    double v = eval_guess(params.guess, t, tau).delta + eval_terms(params.delta_drift, t);
    for (int k = 0; k < n_de; ++k) {
      const double arg = kTwoPi * params.delta_freqs_mhz[k] * t;
      v += params.coeffs[2 * n_om + k] * std::sin(arg) +
           params.coeffs[2 * n_om + n_de + k] * std::cos(arg);
    }
    return v;
  };
  const double pin_start =
      constraints.delta_start ? *constraints.delta_start - delta_raw(0.0) : 0.0;
  const double pin_end =
      constraints.delta_end ? *constraints.delta_end - delta_raw(tau) : 0.0;
  if (constraints.delta_start && std::abs(*constraints.delta_start) > constraints.delta_bound + 1e-9) {
    throw ConstraintError("synthesize: pinned delta(0) exceeds the detuning bound");
  }
  if (constraints.delta_end && std::abs(*constraints.delta_end) > constraints.delta_bound + 1e-9) {
    throw ConstraintError("synthesize: pinned delta(tau) exceeds the detuning bound");
  }

  for (int j = 0; j <= n; ++j) {
    const double t = (j == n) ? tau : j * dt;

    double om = eval_guess(params.guess, t, tau).omega + eval_terms(params.omega_drift, t);
    for (int k = 0; k < n_om; ++k) {
      const double arg = kTwoPi * params.omega_freqs_mhz[k] * t;
      om += params.coeffs[k] * std::sin(arg) + params.coeffs[n_om + k] * std::cos(arg);
    }
    om = std::clamp(om, 0.0, constraints.omega_max);
    // Envelope forces exact zeros at both ends over one rise time.
    om *= smooth01(t / t_rise_om) * smooth01((tau - t) / t_rise_om);

    double de = delta_raw(t);
    if (constraints.delta_start) de += pin_start * smooth01(1.0 - t / t_rise_de);
    if (constraints.delta_end) de += pin_end * smooth01(1.0 - (tau - t) / t_rise_de);
    de = std::clamp(de, -constraints.delta_bound, constraints.delta_bound);

    pulse.omega[j] = om;
    pulse.delta[j] = de;
  }
  return pulse;
}

SampledPulse linear_chirp_reference(double duration, double delta_start, double delta_end,
                                    double omega_peak, const ControlConstraints& constraints,
                                    double dt) {
  if (duration <= 0.0) throw UsageError("linear_chirp_reference: duration must be positive");
  if (omega_peak > constraints.omega_max + 1e-12) {
    throw ConstraintError("linear_chirp_reference: omega_peak exceeds the Rabi cap");
  }
  PulseParams params;
  params.duration = duration;
  params.guess.kind = GuessPulse::Kind::Chirp;
  params.guess.omega_peak = omega_peak;
  params.guess.delta_start = delta_start;
  params.guess.delta_end = delta_end;
  params.guess.ramp = std::min(0.5, 0.25 * duration);
  params.coeffs = Eigen::VectorXd::Zero(0);
  return synthesize(params, constraints, dt);
}

void write_pulse_csv(const SampledPulse& pulse, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_pulse_csv: cannot open " + path);
  out << "t_us,omega_over_2pi_mhz,delta_over_2pi_mhz\n";
  char line[128];
  for (std::size_t j = 0; j < pulse.omega.size(); ++j) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", j * pulse.dt,
                  rad_us_to_mhz(pulse.omega[j]), rad_us_to_mhz(pulse.delta[j]));
    out << line;
  }
}

SampledPulse read_pulse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_pulse_csv: cannot open " + path);
  SampledPulse pulse;
  std::vector<double> times;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.find("t_us") != std::string::npos) continue;
    double t, om, de;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &t, &om, &de) != 3) {
      throw ConfigError("read_pulse_csv: malformed row at line " + std::to_string(lineno) +
                        " of " + path);
    }
    times.push_back(t);
    pulse.omega.push_back(mhz_to_rad_us(om));
    pulse.delta.push_back(mhz_to_rad_us(de));
  }
  if (times.size() < 2) throw ConfigError("read_pulse_csv: need at least two samples");
  pulse.dt = times[1] - times[0];
  if (pulse.dt <= 0.0) throw ConfigError("read_pulse_csv: nonincreasing time grid");
  for (std::size_t j = 1; j + 1 < times.size(); ++j) {
    if (std::abs(times[j + 1] - times[j] - pulse.dt) > 1e-9) {
      throw ConfigError("read_pulse_csv: non-uniform time grid at line " +
                        std::to_string(j + 2));
    }
  }
  return pulse;
}

double rise_time(const std::vector<double>& samples, double dt) {
  const double peak = *std::max_element(samples.begin(), samples.end());
  if (peak <= 0.0) return 0.0;
  const double lo = 0.1 * peak, hi = 0.9 * peak;
  int i_lo = -1, i_hi = -1;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (i_lo < 0 && samples[j] >= lo) i_lo = static_cast<int>(j);
    if (i_hi < 0 && samples[j] >= hi) {
      i_hi = static_cast<int>(j);
      break;
    }
  }
  if (i_lo < 0 || i_hi < 0) return 0.0;
  return (i_hi - i_lo) * dt;
}

}  // namespace rydopt
