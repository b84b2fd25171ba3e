#pragma once

#include <Eigen/Core>
#include <vector>

#include "rydopt/basis.hpp"
#include "rydopt/hamiltonian.hpp"
#include "rydopt/pulse.hpp"

namespace rydopt {

struct RecordPolicy {
  // Snapshot spacing in us; <= 0 records only the endpoints. Must be an
  // integer multiple of the pulse dt.
  double interval = 0.01;
  bool store_states = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> excitation_number;  // <N_e>(t) at the record times
  std::vector<double> norms;
  std::vector<Eigen::VectorXcd> states;   // populated when store_states
  QuantumState final_state;
};

// Integrates the Schroedinger equation under piecewise-constant controls,
// one Lanczos-approximated step exp(-i H_j dt) per pulse sample interval
// (midpoint control value). Unitary by construction; norm drift is checked
// and never silently repaired.
Trajectory evolve(const QuantumState& psi0, const HamiltonianTerms& terms,
                  const SampledPulse& pulse, const RecordPolicy& record = {});

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors; // one column per value
  int matvecs = 0;
};

struct LanczosOptions {
  int max_basis = 160;
  int max_cycles = 600;
  double rel_tol = 1e-10;  // residual tolerance relative to the norm bound
  const Eigen::VectorXcd* warm_start = nullptr;
  std::uint64_t start_seed = 0x5eed;
};

// Lowest k eigenpairs of H(omega, delta) by restarted Lanczos with full
// reorthogonalization, Rayleigh-Ritz extraction, locking of converged pairs
// and random injections for degenerate clusters.
EigenPairs dressed_low_spectrum(const HamiltonianTerms& terms, double omega, double delta,
                                int k, const LanczosOptions& options = {});

struct AdiabaticityPoint {
  double time;
  double energy;          // <psi|H(t)|psi>
  double ground_energy;   // E0(t)
  double gap;             // E1(t) - E0(t)
  double ground_overlap;  // |<psi_G(t)|psi(t)>|^2
};

// Requires a trajectory recorded with states. k >= 2 eigenpairs are tracked
// with warm starts and overlap-aligned phases between consecutive records.
std::vector<AdiabaticityPoint> adiabaticity_trace(const Trajectory& trajectory,
                                                  const HamiltonianTerms& terms,
                                                  const SampledPulse& pulse, int k = 2);

}  // namespace rydopt
