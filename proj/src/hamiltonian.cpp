#include "rydopt/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rydopt/errors.hpp"

namespace rydopt {

double HamiltonianTerms::norm_bound(double omega, double delta) const {
  double diag_max = 0.0;
  for (int i = 0; i < diag_interaction.size(); ++i) {
    diag_max = std::max(diag_max,
                        std::abs(diag_interaction[i] - delta * excitation_count[i]));
  }
  double drive = 0.0;
  for (double e : unit_enhancement) drive += e;
  return diag_max + 0.5 * std::abs(omega) * drive;
}

HamiltonianTerms assemble(const SuperAtomChain& chain,
                          std::shared_ptr<const ManyBodyBasis> basis,
                          const PhysicalModel& model) {
  if (!basis) throw UsageError("assemble: null basis");
  if (basis->n_units != chain.n_units) {
    throw UsageError("assemble: chain and basis disagree on the unit count");
  }
  const int n = chain.n_units;
  HamiltonianTerms terms;
  terms.basis = basis;
  terms.unit_enhancement = chain.enhancements;

  terms.pair_interaction = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = (chain.centers[i] - chain.centers[j]).norm();
      const double v = vdw_interaction(model, r);
      terms.pair_interaction(i, j) = v;
      terms.pair_interaction(j, i) = v;
    }
  }

  const int dim = basis->size();
  terms.diag_interaction.resize(dim);
  terms.excitation_count.resize(dim);
  for (int idx = 0; idx < dim; ++idx) {
    const std::uint32_t mask = basis->configs[idx];
    terms.excitation_count[idx] = std::popcount(mask);
    double v = 0.0;
    std::uint32_t rest = mask;
    while (rest) {
      const int i = std::countr_zero(rest);
      rest &= rest - 1;
      std::uint32_t rest2 = rest;
      while (rest2) {
        const int j = std::countr_zero(rest2);
        rest2 &= rest2 - 1;
        v += terms.pair_interaction(i, j);
      }
    }
    terms.diag_interaction[idx] = v;
  }

  // One edge per (config, unit currently ground) whose flip stays in basis.
  for (int idx = 0; idx < dim; ++idx) {
    const std::uint32_t mask = basis->configs[idx];
    for (int u = 0; u < n; ++u) {
      if (mask & (1u << u)) continue;
      const int partner = basis->index(mask | (1u << u));
      if (partner < 0) continue;
      terms.edges.lo.push_back(idx);
      terms.edges.hi.push_back(partner);
      terms.edges.unit.push_back(u);
    }
  }
  return terms;
}

void apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                       const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  const int dim = terms.dim();
  if (x.size() != dim) throw UsageError("apply_hamiltonian: dimension mismatch");
  y.resize(dim);
  for (int i = 0; i < dim; ++i) {
    y[i] = (terms.diag_interaction[i] - delta * terms.excitation_count[i]) * x[i];
  }
  const double half_omega = 0.5 * omega;
  if (half_omega != 0.0) {
    const std::size_t m = terms.edges.size();
    for (std::size_t e = 0; e < m; ++e) {
      const double c = half_omega * terms.unit_enhancement[terms.edges.unit[e]];
      const int lo = terms.edges.lo[e];
      const int hi = terms.edges.hi[e];
      y[lo] += c * x[hi];
      y[hi] += c * x[lo];
    }
  }
}

Eigen::VectorXcd apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                                   const Eigen::VectorXcd& x) {
  Eigen::VectorXcd y;
  apply_hamiltonian(terms, omega, delta, x, y);
  return y;
}

QuantumState apply_hamiltonian(const HamiltonianTerms& terms, double omega, double delta,
                               const QuantumState& psi) {
  if (!psi.basis || !terms.basis || !psi.basis->same_space(*terms.basis)) {
    throw UsageError("apply_hamiltonian: state and Hamiltonian live on different bases");
  }
  QuantumState out;
  out.basis = psi.basis;
  apply_hamiltonian(terms, omega, delta, psi.amplitudes, out.amplitudes);
  return out;
}

std::vector<SpectrumEntry> classical_spectrum(const HamiltonianTerms& terms, double delta) {
  std::vector<SpectrumEntry> entries;
  entries.reserve(terms.dim());
  for (int i = 0; i < terms.dim(); ++i) {
    entries.push_back({terms.diag_interaction[i] - delta * terms.excitation_count[i],
                       terms.basis->configs[i], terms.excitation_count[i]});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const SpectrumEntry& a, const SpectrumEntry& b) {
                     return a.energy < b.energy;
                   });
  return entries;
}

double critical_detuning(const HamiltonianTerms& terms) {
  const int n = terms.n_units();
  int live = 0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (terms.unit_enhancement[i] <= 0.0) continue;
    ++live;
    for (int j = i + 1; j < n; ++j) {
      if (terms.unit_enhancement[j] <= 0.0) continue;
      sum += terms.pair_interaction(i, j);
    }
  }
  if (live < 2) throw UsageError("critical_detuning: need at least two live units");
  return sum / static_cast<double>(live);
}

double critical_detuning(const SuperAtomChain& chain, const PhysicalModel& model) {
  int live = 0;
  double sum = 0.0;
  for (int i = 0; i < chain.n_units; ++i) {
    if (!chain.unit_active(i)) continue;
    ++live;
    for (int j = i + 1; j < chain.n_units; ++j) {
      if (!chain.unit_active(j)) continue;
      sum += vdw_interaction(model, (chain.centers[i] - chain.centers[j]).norm());
    }
  }
  if (live < 2) throw UsageError("critical_detuning: need at least two live units");
  return sum / static_cast<double>(live);
}

double end_to_end_interaction(const SuperAtomChain& chain, const PhysicalModel& model) {
  if (chain.n_units < 2) throw UsageError("end_to_end_interaction: need at least two units");
  double xmin = chain.centers[0].x(), xmax = xmin;
  for (const auto& c : chain.centers) {
    xmin = std::min(xmin, c.x());
    xmax = std::max(xmax, c.x());
  }
  return vdw_interaction(model, xmax - xmin);
}

}  // namespace rydopt
