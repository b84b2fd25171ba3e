#include "rydopt/observables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>

#include "rydopt/errors.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

namespace {
using Complex = std::complex<double>;

void require_same_basis(const QuantumState& a, const QuantumState& b, const char* who) {
  if (!a.basis || !b.basis || !a.basis->same_space(*b.basis)) {
    throw UsageError(std::string(who) + ": states live on different bases");
  }
}
}  // namespace

double fidelity(const QuantumState& psi, const QuantumState& target) {
  require_same_basis(psi, target, "fidelity");
  return std::norm(target.amplitudes.dot(psi.amplitudes));
}

Eigen::VectorXd excitation_density(const QuantumState& psi) {
  const auto& basis = *psi.basis;
  Eigen::VectorXd density = Eigen::VectorXd::Zero(basis.n_units);
  for (int i = 0; i < basis.size(); ++i) {
    const double p = std::norm(psi.amplitudes[i]);
    std::uint32_t rest = basis.configs[i];
    while (rest) {
      density[std::countr_zero(rest)] += p;
      rest &= rest - 1;
    }
  }
  return density;
}

Eigen::VectorXd excitation_distribution(const QuantumState& psi) {
  const auto& basis = *psi.basis;
  Eigen::VectorXd pn = Eigen::VectorXd::Zero(basis.n_units + 1);
  for (int n = 0; n <= basis.n_units; ++n) {
    for (int i = basis.sector_offsets[n]; i < basis.sector_offsets[n + 1]; ++i) {
      pn[n] += std::norm(psi.amplitudes[i]);
    }
  }
  return pn;
}

std::vector<double> decay_probability(const Trajectory& trajectory, double gamma_decay) {
  std::vector<double> pd(trajectory.times.size(), 0.0);
  for (std::size_t i = 1; i < trajectory.times.size(); ++i) {
    const double dt = trajectory.times[i] - trajectory.times[i - 1];
    pd[i] = pd[i - 1] + 0.5 * gamma_decay *
                            (trajectory.excitation_number[i] +
                             trajectory.excitation_number[i - 1]) *
                            dt;
  }
  return pd;
}

QuantumState resolve_target(const TargetState& target, const SuperAtomChain& chain,
                            const HamiltonianTerms& terms, double final_delta) {
  const auto& basis = terms.basis;
  if (!basis || basis->n_units != chain.n_units) {
    throw UsageError("resolve_target: chain and Hamiltonian disagree");
  }
  const std::uint32_t live = chain.active_mask();
  const std::uint32_t dead = ~live & ((1u << chain.n_units) - 1u);

  switch (target.kind) {
    case TargetState::Kind::Explicit: {
      if (!target.explicit_state) throw UsageError("resolve_target: missing explicit state");
      QuantumState psi = *target.explicit_state;
      if (!psi.basis->same_space(*basis)) {
        throw UsageError("resolve_target: explicit state basis mismatch");
      }
      psi.amplitudes.normalize();
      return psi;
    }
    case TargetState::Kind::Crystal: {
      // Classical ground config over live units at the final detuning.
      int best = -1, second = -1;
      for (int i = 0; i < basis->size(); ++i) {
        if (basis->configs[i] & dead) continue;
        const double e = terms.diag_interaction[i] - final_delta * terms.excitation_count[i];
        if (best < 0 || e < terms.diag_interaction[best] -
                                final_delta * terms.excitation_count[best]) {
          second = best;
          best = i;
        } else if (second < 0 || e < terms.diag_interaction[second] -
                                         final_delta * terms.excitation_count[second]) {
          second = i;
        }
      }
      if (best < 0) throw UsageError("resolve_target: empty live-config set");
      if (second >= 0) {
        const double e0 =
            terms.diag_interaction[best] - final_delta * terms.excitation_count[best];
        const double e1 =
            terms.diag_interaction[second] - final_delta * terms.excitation_count[second];
        if (std::abs(e1 - e0) < 1e-9 * std::max(1.0, std::abs(e0))) {
          throw ConfigError(
              "resolve_target: classical ground state is degenerate at the final "
              "detuning; shift delta off the crossing");
        }
      }
      return fock_state(basis, basis->configs[best]);
    }
    case TargetState::Kind::Ghz: {
      QuantumState psi;
      psi.basis = basis;
      psi.amplitudes = Eigen::VectorXcd::Zero(basis->size());
      const int ig = basis->index(0);
      const int ie = basis->index(live);
      if (ig < 0 || ie < 0 || ig == ie) {
        throw UsageError("resolve_target: GHZ endpoints missing from the basis");
      }
      const double inv = 1.0 / std::sqrt(2.0);
      psi.amplitudes[ig] = inv;
      psi.amplitudes[ie] = inv * std::exp(Complex(0.0, target.ghz_theta));
      return psi;
    }
    case TargetState::Kind::Symmetric: {
      const int n_live = chain.active_count();
      if (target.symmetric_coeffs.empty()) {
        throw UsageError("resolve_target: symmetric target needs coefficients");
      }
      QuantumState psi;
      psi.basis = basis;
      psi.amplitudes = Eigen::VectorXcd::Zero(basis->size());
      // |s_n> = binomial-normalized sum over n-excitation patterns of live units.
      for (int n = 0; n < static_cast<int>(target.symmetric_coeffs.size()) && n <= n_live;
           ++n) {
        if (target.symmetric_coeffs[n] == 0.0) continue;
        std::vector<int> indices;
        for (int i = basis->sector_offsets[n]; i < basis->sector_offsets[n + 1]; ++i) {
          const std::uint32_t c = basis->configs[i];
          if ((c & dead) == 0) indices.push_back(i);
        }
        if (indices.empty()) continue;
        const double w = target.symmetric_coeffs[n] / std::sqrt(double(indices.size()));
        for (int i : indices) psi.amplitudes[i] += w;
      }
      const double nrm = psi.amplitudes.norm();
      if (nrm == 0.0) throw UsageError("resolve_target: symmetric target vanished");
      psi.amplitudes /= nrm;
      return psi;
    }
  }
  throw UsageError("resolve_target: unknown target kind");
}

std::map<std::uint32_t, int> measure_configs(const QuantumState& psi, int n_shots,
                                             std::uint64_t seed) {
  if (n_shots < 1) throw UsageError("measure_configs: need at least one shot");
  const int dim = psi.basis->size();
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    acc += std::norm(psi.amplitudes[i]);
    cdf[i] = acc;
  }
  Rng rng(seed);
  std::map<std::uint32_t, int> histogram;
  for (int s = 0; s < n_shots; ++s) {
    const double u = rng.uniform01() * acc;
    const int idx = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    histogram[psi.basis->configs[std::min(idx, dim - 1)]]++;
  }
  return histogram;
}

SubspaceExtraction extract_subspace(
    const std::vector<std::pair<double, QuantumState>>& ensemble, std::uint32_t g_mask,
    std::uint32_t e_mask) {
  if (ensemble.empty()) throw UsageError("extract_subspace: empty ensemble");
  double total_weight = 0.0;
  double rho_gg = 0.0, rho_ee = 0.0;
  Complex rho_eg = 0.0;  // <E|rho|G>
  for (const auto& [w, psi] : ensemble) {
    const int ig = psi.basis->index(g_mask);
    const int ie = psi.basis->index(e_mask);
    if (ig < 0 || ie < 0) throw UsageError("extract_subspace: subspace configs missing");
    const Complex ag = psi.amplitudes[ig];
    const Complex ae = psi.amplitudes[ie];
    rho_gg += w * std::norm(ag);
    rho_ee += w * std::norm(ae);
    rho_eg += w * ae * std::conj(ag);
    total_weight += w;
  }
  rho_gg /= total_weight;
  rho_ee /= total_weight;
  rho_eg /= total_weight;

  SubspaceExtraction out;
  out.subspace_trace = rho_gg + rho_ee;
  out.leakage = 1.0 - out.subspace_trace;
  if (out.subspace_trace < 0.5) {
    throw UsageError("extract_subspace: less than half the population is in the "
                     "{|G>,|E>} subspace; the two-level description does not apply");
  }
  out.sub.gamma = std::abs(rho_eg) / out.subspace_trace;
  out.sub.alpha = std::arg(rho_eg);
  if (out.sub.alpha < 0.0) out.sub.alpha += kTwoPi;
  return out;
}

namespace {

// Shared machinery for the detection protocol: |G> and |E> evolved once under
// H_d; every (gamma, alpha) recombination is then a cheap trace formula,
//   E_i(t) = (n_G + n_E)/2 + 2 Re[gamma e^{i alpha} M(t)],
// with M(t) = <G_t|P_i|E_t>.
struct DetectionTraces {
  std::vector<double> times;
  std::vector<double> n_g, n_e;     // P_i expectation in the two branches
  std::vector<Complex> cross;       // M(t)
};

DetectionTraces propagate_detection(const HamiltonianTerms& terms, double omega_m,
                                    double t_max, double dt, int unit_index) {
  const std::uint32_t live = [&] {
    std::uint32_t mask = 0;
    for (int u = 0; u < terms.n_units(); ++u) {
      if (terms.unit_enhancement[u] > 0.0) mask |= 1u << u;
    }
    return mask;
  }();
  if (!(live & (1u << unit_index))) {
    throw UsageError("detection: probe unit is dead");
  }

  SampledPulse drive;
  drive.dt = dt;
  const int n = std::max(1, static_cast<int>(std::llround(t_max / dt)));
  drive.omega.assign(n + 1, omega_m);
  drive.delta.assign(n + 1, 0.0);

  RecordPolicy policy;
  policy.interval = std::max(dt, 0.01);
  policy.store_states = true;

  const Trajectory traj_g = evolve(ground_config(terms.basis), terms, drive, policy);
  const Trajectory traj_e = evolve(fock_state(terms.basis, live), terms, drive, policy);

  const std::uint32_t probe = 1u << unit_index;
  DetectionTraces traces;
  traces.times = traj_g.times;
  traces.n_g.resize(traces.times.size());
  traces.n_e.resize(traces.times.size());
  traces.cross.resize(traces.times.size());
  for (std::size_t r = 0; r < traces.times.size(); ++r) {
    const auto& g = traj_g.states[r];
    const auto& e = traj_e.states[r];
    double ng = 0.0, ne = 0.0;
    Complex m = 0.0;
    for (int i = 0; i < terms.dim(); ++i) {
      if (!(terms.basis->configs[i] & probe)) continue;
      ng += std::norm(g[i]);
      ne += std::norm(e[i]);
      m += std::conj(g[i]) * e[i];
    }
    traces.n_g[r] = ng;
    traces.n_e[r] = ne;
    traces.cross[r] = m;
  }
  return traces;
}

double recombine(const DetectionTraces& traces, std::size_t r, double gamma, double alpha) {
  return 0.5 * (traces.n_g[r] + traces.n_e[r]) +
         2.0 * std::real(gamma * std::exp(Complex(0.0, alpha)) * traces.cross[r]);
}

}  // namespace

DetectionResult detection_evolution(const SubspaceState& sub, const HamiltonianTerms& terms,
                                    double omega_m, double theta_target, double t_max,
                                    double dt, int unit_index) {
  if (sub.gamma < 0.0 || sub.gamma > 0.5 + 1e-12) {
    throw UsageError("detection_evolution: gamma outside [0, 1/2] breaks positivity");
  }
  const DetectionTraces traces = propagate_detection(terms, omega_m, t_max, dt, unit_index);
  DetectionResult out;
  out.times = traces.times;
  out.excitation_candidate.resize(traces.times.size());
  out.excitation_reference.resize(traces.times.size());
  out.deviation.resize(traces.times.size());
  for (std::size_t r = 0; r < traces.times.size(); ++r) {
    out.excitation_candidate[r] = recombine(traces, r, sub.gamma, sub.alpha);
    out.excitation_reference[r] = recombine(traces, r, 0.5, theta_target);
    out.deviation[r] = out.excitation_candidate[r] - out.excitation_reference[r];
    const double a = std::abs(out.deviation[r]);
    if (a > out.max_abs_deviation) {
      out.max_abs_deviation = a;
      out.argmax_time = traces.times[r];
    }
  }
  return out;
}

DeviationMap deviation_map(const HamiltonianTerms& terms, double omega_m, double theta_target,
                           int n_gamma, int n_alpha, double t_max, double dt,
                           int unit_index) {
  if (n_gamma < 2 || n_alpha < 2) {
    throw UsageError("deviation_map: need at least a 2x2 grid");
  }
  const DetectionTraces traces = propagate_detection(terms, omega_m, t_max, dt, unit_index);
  DeviationMap map;
  map.gammas.resize(n_gamma);
  map.alphas.resize(n_alpha);
  for (int i = 0; i < n_gamma; ++i) map.gammas[i] = 0.5 * i / (n_gamma - 1);
  for (int j = 0; j < n_alpha; ++j) map.alphas[j] = kTwoPi * j / n_alpha;
  map.max_abs_deviation.setZero(n_gamma, n_alpha);
  map.argmax_time.setZero(n_gamma, n_alpha);
  for (int i = 0; i < n_gamma; ++i) {
    for (int j = 0; j < n_alpha; ++j) {
      double best = 0.0, best_t = 0.0;
      for (std::size_t r = 0; r < traces.times.size(); ++r) {
        const double d = std::abs(recombine(traces, r, map.gammas[i], map.alphas[j]) -
                                  recombine(traces, r, 0.5, theta_target));
        if (d > best) {
          best = d;
          best_t = traces.times[r];
        }
      }
      map.max_abs_deviation(i, j) = best;
      map.argmax_time(i, j) = best_t;
    }
  }
  return map;
}

}  // namespace rydopt
