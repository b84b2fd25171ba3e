#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "rydopt/basis.hpp"
#include "rydopt/hamiltonian.hpp"
#include "rydopt/propagator.hpp"

namespace rydopt {

// |<target|psi>|^2, global-phase invariant.
double fidelity(const QuantumState& psi, const QuantumState& target);

// Per-unit excited population n_e(x).
Eigen::VectorXd excitation_density(const QuantumState& psi);

// P_n: population per excitation-number sector, n = 0..n_units.
Eigen::VectorXd excitation_distribution(const QuantumState& psi);

// Integrated decay bound P_d(t) = int_0^t Gamma <N_e> dt' by the trapezoid
// rule over the trajectory's record grid; monotone nondecreasing.
std::vector<double> decay_probability(const Trajectory& trajectory, double gamma_decay);

// Targets are resolved per realization: dead units are excluded from the
// excitation patterns, so the ensemble figure of merit stays meaningful
// under defects.
struct TargetState {
  enum class Kind { Crystal, Ghz, Symmetric, Explicit };
  Kind kind = Kind::Crystal;
  int crystal_excitations = -1;           // bookkeeping only; -1 = unspecified
  double ghz_theta = 0.0;
  std::vector<double> symmetric_coeffs;   // a_n, n = 0..N
  std::shared_ptr<const QuantumState> explicit_state;
};

QuantumState resolve_target(const TargetState& target, const SuperAtomChain& chain,
                            const HamiltonianTerms& terms, double final_delta);

// i.i.d. projective samples from |amplitudes|^2; bitmask -> count.
std::map<std::uint32_t, int> measure_configs(const QuantumState& psi, int n_shots,
                                             std::uint64_t seed);

// rho restricted to span{|G>, |E>}: diagonal (1/2, 1/2), coherence
// gamma * exp(i alpha) = <E|rho|G>, so a pure GHZ{theta} maps to
// (gamma, alpha) = (1/2, theta).
struct SubspaceState {
  double gamma = 0.0;
  double alpha = 0.0;  // in [0, 2pi)
};

struct SubspaceExtraction {
  SubspaceState sub;
  double leakage = 0.0;         // 1 - <G|rho|G> - <E|rho|E>
  double subspace_trace = 0.0;
};

// The ensemble is a list of (weight, pure state); weights need not be
// normalized. g_mask/e_mask select the |G>/|E> configs (defaults: empty and
// fully excited pattern of the basis units).
SubspaceExtraction extract_subspace(const std::vector<std::pair<double, QuantumState>>& ensemble,
                                    std::uint32_t g_mask, std::uint32_t e_mask);

struct DetectionResult {
  std::vector<double> times;
  std::vector<double> excitation_candidate;  // E_i of the candidate rho(t)
  std::vector<double> excitation_reference;  // E_i of the GHZ reference
  std::vector<double> deviation;             // D_t
  double max_abs_deviation = 0.0;            // |D|
  double argmax_time = 0.0;
};

// Two-step verification dynamics: evolve |G> and |E> once under the detection
// Hamiltonian (drive at omega_m, zero detuning, full interactions) and
// recombine them into rho(t) for any (gamma, alpha). E_i is the excitation
// probability of unit `unit_index`; D_t compares against the GHZ{theta}
// reference.
DetectionResult detection_evolution(const SubspaceState& sub, const HamiltonianTerms& terms,
                                    double omega_m, double theta_target, double t_max,
                                    double dt, int unit_index = 0);

struct DeviationMap {
  std::vector<double> gammas;  // [0, 1/2]
  std::vector<double> alphas;  // [0, 2pi)
  Eigen::MatrixXd max_abs_deviation;  // |D|, gammas x alphas
  Eigen::MatrixXd argmax_time;
};

DeviationMap deviation_map(const HamiltonianTerms& terms, double omega_m, double theta_target,
                           int n_gamma, int n_alpha, double t_max, double dt,
                           int unit_index = 0);

}  // namespace rydopt
