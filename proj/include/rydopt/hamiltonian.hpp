#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "rydopt/basis.hpp"
#include "rydopt/lattice.hpp"
#include "rydopt/model.hpp"

namespace rydopt {

// Matrix-free representation of
//   H = (omega/2) sum_u sqrt(n_u) sigma_x^(u) + sum_{u<v} V_uv n^e_u n^e_v
//       - delta sum_u n^e_u
// over the enumerated basis. The drive is stored as an undirected edge list
// between configs differing in one unit, so memory scales with nonzeros.
struct HamiltonianTerms {
  std::shared_ptr<const ManyBodyBasis> basis;
  std::vector<double> unit_enhancement;  // sqrt(occupancy) per unit; 0 = dead
  Eigen::MatrixXd pair_interaction;      // V_uv at center-to-center distance, rad/us
  Eigen::VectorXd diag_interaction;      // per config, rad/us
  Eigen::VectorXi excitation_count;      // N_e per config

  struct DriveEdges {
    std::vector<int> lo;            // config index with the unit in |g>
    std::vector<int> hi;            // same config with the unit in |e>
    std::vector<std::int32_t> unit; // flipped unit
    std::size_t size() const { return lo.size(); }
  };
  DriveEdges edges;

  int n_units() const { return basis ? basis->n_units : 0; }
  int dim() const { return basis ? basis->size() : 0; }
  // Crude operator-norm bound: max diagonal magnitude plus total drive weight.
  double norm_bound(double omega, double delta) const;
};

HamiltonianTerms assemble(const SuperAtomChain& chain,
                          std::shared_ptr<const ManyBodyBasis> basis,
                          const PhysicalModel& model);

// y = H(omega, delta) x. Reentrant; deterministic accumulation order.
void apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                       const Eigen::VectorXcd& x, Eigen::VectorXcd& y);
Eigen::VectorXcd apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                                   const Eigen::VectorXcd& x);
// Same contract for a QuantumState (basis checked).
QuantumState apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                               const QuantumState& psi);

struct SpectrumEntry {
  double energy;         // rad/us
  std::uint32_t config;
  int n_excited;
};

// Omega -> 0 eigenvalues (the diagonal), sorted ascending with their configs.
std::vector<SpectrumEntry> classical_spectrum(const HamiltonianTerms& terms, double delta);

// Detuning at which the all-ground and fully excited (live units) configs are
// classically degenerate: (1/N) sum_{u<v} V_uv over live units.
double critical_detuning(const HamiltonianTerms& terms);
double critical_detuning(const SuperAtomChain& chain, const PhysicalModel& model);

// Interaction energy across the chain extent along x; the V_L used to
// normalize spectrum plots.
double end_to_end_interaction(const SuperAtomChain& chain, const PhysicalModel& model);

}  // namespace rydopt
