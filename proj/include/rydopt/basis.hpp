#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rydopt/lattice.hpp"

namespace rydopt {

// Both filters may be combined; an empty Truncation keeps the full 2^N space.
struct Truncation {
  std::optional<int> max_excitations;
  std::optional<double> blockade_radius_um;

  static Truncation none() { return {}; }
  bool is_none() const { return !max_excitations && !blockade_radius_um; }
};

// Explicitly enumerated configs, sorted by (excitation number, bitmask), so
// excitation sectors are contiguous and truncated/full bases share one
// propagation code path.
struct ManyBodyBasis {
  int n_units = 0;
  Truncation truncation;
  std::vector<std::uint32_t> configs;
  std::unordered_map<std::uint32_t, int> index_of;
  std::vector<int> sector_offsets;  // sector n spans [offsets[n], offsets[n+1])

  int size() const { return static_cast<int>(configs.size()); }
  // -1 when the bitmask is excluded by truncation.
  int index(std::uint32_t mask) const {
    auto it = index_of.find(mask);
    return it == index_of.end() ? -1 : it->second;
  }
  bool same_space(const ManyBodyBasis& other) const {
    return this == &other || (n_units == other.n_units && configs == other.configs);
  }
};

std::shared_ptr<const ManyBodyBasis> build_basis(const SuperAtomChain& chain,
                                                 const Truncation& truncation);

struct QuantumState {
  std::shared_ptr<const ManyBodyBasis> basis;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

// |gg...g>
QuantumState ground_config(std::shared_ptr<const ManyBodyBasis> basis);

// Unit amplitude on one excitation pattern; throws if truncation excludes it.
QuantumState fock_state(std::shared_ptr<const ManyBodyBasis> basis, std::uint32_t bitmask);

}  // namespace rydopt
