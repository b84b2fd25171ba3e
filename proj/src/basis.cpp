#include "rydopt/basis.hpp"

#include <algorithm>
#include <bit>

#include "rydopt/errors.hpp"

namespace rydopt {

std::shared_ptr<const ManyBodyBasis> build_basis(const SuperAtomChain& chain,
                                                 const Truncation& truncation) {
  if (chain.n_units < 1) throw ConfigError("build_basis: need at least one unit");
  if (chain.n_units > 24) {
    throw ConfigError("build_basis: more than 24 units is beyond the dense-basis design");
  }
  const int n = chain.n_units;

  // conflict[u]: units that may not be excited together with u.
  std::vector<std::uint32_t> conflict(n, 0);
  if (truncation.blockade_radius_um) {
    const double rb = *truncation.blockade_radius_um;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if ((chain.centers[i] - chain.centers[j]).norm() < rb) {
          conflict[i] |= (1u << j);
          conflict[j] |= (1u << i);
        }
      }
    }
  }

  auto basis = std::make_shared<ManyBodyBasis>();
  basis->n_units = n;
  basis->truncation = truncation;
  const std::uint32_t total = 1u << n;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const int ne = std::popcount(mask);
    if (truncation.max_excitations && ne > *truncation.max_excitations) continue;
    if (truncation.blockade_radius_um) {
      bool blocked = false;
      std::uint32_t rest = mask;
      while (rest) {
        const int u = std::countr_zero(rest);
        rest &= rest - 1;
        if (mask & conflict[u]) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
    }
    basis->configs.push_back(mask);
  }
  if (basis->configs.empty()) throw ConfigError("build_basis: truncation leaves no configs");

  std::sort(basis->configs.begin(), basis->configs.end(),
            [](std::uint32_t a, std::uint32_t b) {
              const int pa = std::popcount(a), pb = std::popcount(b);
              return pa != pb ? pa < pb : a < b;
            });
  basis->index_of.reserve(basis->configs.size() * 2);
  for (int i = 0; i < basis->size(); ++i) basis->index_of.emplace(basis->configs[i], i);

  basis->sector_offsets.assign(n + 2, 0);
  for (const std::uint32_t c : basis->configs) basis->sector_offsets[std::popcount(c) + 1]++;
  for (int s = 1; s < n + 2; ++s) basis->sector_offsets[s] += basis->sector_offsets[s - 1];
  return basis;
}

QuantumState ground_config(std::shared_ptr<const ManyBodyBasis> basis) {
  return fock_state(std::move(basis), 0);
}

QuantumState fock_state(std::shared_ptr<const ManyBodyBasis> basis, std::uint32_t bitmask) {
  if (!basis) throw UsageError("fock_state: null basis");
  const int idx = basis->index(bitmask);
  if (idx < 0) {
    throw UsageError("fock_state: bitmask " + std::to_string(bitmask) +
                     " is not part of this (possibly truncated) basis");
  }
  QuantumState psi;
  psi.basis = std::move(basis);
  psi.amplitudes = Eigen::VectorXcd::Zero(psi.basis->size());
  psi.amplitudes[idx] = 1.0;
  return psi;
}

}  // namespace rydopt
