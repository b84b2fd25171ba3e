#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rydopt/model.hpp"

namespace rydopt {

enum class LatticeShape { Bar, CornerSquare, Custom };

// Site positions are expressed in units of the lattice spacing a.
// `groups` is the geometry's natural partition into super-atom candidates:
// columns for bars, corner blocks for corner squares, singletons otherwise.
struct LatticeGeometry {
  LatticeShape shape = LatticeShape::Custom;
  std::string shape_tag = "custom";
  std::vector<Eigen::Vector2d> sites;
  std::vector<std::vector<int>> groups;

  int n_sites() const { return static_cast<int>(sites.size()); }
};

// rows x cols grid; the column index is the chain coordinate x.
LatticeGeometry build_bar(int rows, int cols);

// Four block x block clusters at the corners of a side x side grid.
LatticeGeometry build_corner_square(int side, int block);

LatticeGeometry custom_geometry(std::vector<Eigen::Vector2d> sites,
                                std::vector<std::vector<int>> groups);

// One defect sample: independent Bernoulli occupancy per site. Empty groups
// are kept so target-state indexing stays stable across realizations.
struct LatticeRealization {
  LatticeGeometry geometry;
  std::vector<char> occupied;
  std::vector<std::vector<int>> groups;  // occupied site indices per group
  std::uint64_t seed = 0;

  int occupied_count() const;
  int empty_group_count() const;
  std::string to_json() const;
};

LatticeRealization sample_realization(const LatticeGeometry& geometry, double filling,
                                      std::uint64_t seed);

// Effective two-level chain of super-atoms. Centers are in um (mean position
// of the occupied sites; nominal group center for dead units, which never
// couple to the drive anyway).
struct SuperAtomChain {
  int n_units = 0;
  std::vector<double> enhancements;  // sqrt(occupancy); 0 marks a dead unit
  std::vector<int> occupancy;
  std::vector<Eigen::Vector2d> centers;  // um

  bool unit_active(int u) const { return occupancy[u] > 0; }
  int active_count() const;
  // Bitmask with all active units excited (the |E> pattern).
  std::uint32_t active_mask() const;
};

// blockade_bound_um < 0 selects the default bound of 8a.
SuperAtomChain reduce_to_superatoms(const LatticeRealization& realization,
                                    const PhysicalModel& model,
                                    double blockade_bound_um = -1.0);

}  // namespace rydopt
