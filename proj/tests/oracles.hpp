// Test-only reference implementations, kept independent of the library's
// computation paths: dense matrices built straight from positions and raw
// constants, propagated by exact eigendecomposition.
#pragma once

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

#include "rydopt/basis.hpp"
#include "rydopt/lattice.hpp"
#include "rydopt/model.hpp"

namespace oracles {

using Complex = std::complex<double>;

// Dense H over the given configs, assembled from first principles.
inline Eigen::MatrixXcd dense_hamiltonian(const rydopt::SuperAtomChain& chain,
                                          const std::vector<std::uint32_t>& configs,
                                          const rydopt::PhysicalModel& model, double omega,
                                          double delta) {
  const int dim = static_cast<int>(configs.size());
  const int n = chain.n_units;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(configs[a] & (1u << i))) continue;
      diag -= delta;
      for (int j = i + 1; j < n; ++j) {
        if (!(configs[a] & (1u << j))) continue;
        const double r = (chain.centers[i] - chain.centers[j]).norm();
        diag += model.c6_over_hbar / std::pow(r, 6.0);
      }
    }
    h(a, a) = diag;
    for (int b = a + 1; b < dim; ++b) {
      const std::uint32_t differ = configs[a] ^ configs[b];
      if (std::popcount(differ) != 1) continue;
      const int u = std::countr_zero(differ);
      h(a, b) = 0.5 * omega * chain.enhancements[u];
      h(b, a) = h(a, b);
    }
  }
  return h;
}

// Exact propagation of a state under a constant dense Hamiltonian.
inline Eigen::VectorXcd dense_evolve(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0,
                                     double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (int i = 0; i < h.rows(); ++i) {
    phases[i] = std::exp(Complex(0.0, -es.eigenvalues()[i] * t));
  }
  return es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi0));
}

// Exact density-matrix propagation under a constant dense Hamiltonian.
inline Eigen::MatrixXcd dense_evolve_rho(const Eigen::MatrixXcd& h,
                                         const Eigen::MatrixXcd& rho0, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  for (int i = 0; i < h.rows(); ++i) {
    u += std::exp(Complex(0.0, -es.eigenvalues()[i] * t)) * es.eigenvectors().col(i) *
         es.eigenvectors().col(i).adjoint();
  }
  return u * rho0 * u.adjoint();
}

// Brute-force classical ground config over raw bitmasks (no basis machinery).
struct ClassicalGround {
  std::uint32_t config;
  double energy;
  int n_excited;
};

inline ClassicalGround brute_force_ground(const rydopt::SuperAtomChain& chain,
                                          const rydopt::PhysicalModel& model, double delta) {
  const int n = chain.n_units;
  ClassicalGround best{0, 0.0, 0};
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      e -= delta;
      for (int j = i + 1; j < n; ++j) {
        if (!(mask & (1u << j))) continue;
        const double r = (chain.centers[i] - chain.centers[j]).norm();
        e += model.c6_over_hbar / std::pow(r, 6.0);
      }
    }
    if (mask == 0 || e < best.energy) {
      best = {mask, e, std::popcount(mask)};
    }
  }
  return best;
}

inline rydopt::SuperAtomChain perfect_chain(const rydopt::LatticeGeometry& geometry,
                                            const rydopt::PhysicalModel& model) {
  return rydopt::reduce_to_superatoms(rydopt::sample_realization(geometry, 1.0, 0), model);
}

}  // namespace oracles
