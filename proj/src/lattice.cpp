#include "rydopt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rydopt/errors.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

LatticeGeometry build_bar(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw ConfigError("build_bar: rows and cols must be at least 1");
  }
  LatticeGeometry g;
  g.shape = LatticeShape::Bar;
  g.shape_tag = "bar{" + std::to_string(rows) + "x" + std::to_string(cols) + "}";
  g.sites.reserve(static_cast<std::size_t>(rows) * cols);
  g.groups.resize(cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      g.groups[c].push_back(static_cast<int>(g.sites.size()));
      g.sites.emplace_back(static_cast<double>(c), static_cast<double>(r));
    }
  }
  return g;
}

LatticeGeometry build_corner_square(int side, int block) {
  if (side < 1 || block < 1) {
    throw ConfigError("build_corner_square: side and block must be at least 1");
  }
  if (2 * block > side) {
    throw ConfigError("build_corner_square: corner blocks overlap (need block <= side/2)");
  }
  LatticeGeometry g;
  g.shape = LatticeShape::CornerSquare;
  g.shape_tag = "corner_square{" + std::to_string(side) + "," + std::to_string(block) + "}";
  const int lo = 0;
  const int hi = side - block;
  const int corners[4][2] = {{lo, lo}, {hi, lo}, {lo, hi}, {hi, hi}};
  g.groups.resize(4);
  for (int q = 0; q < 4; ++q) {
    for (int dx = 0; dx < block; ++dx) {
      for (int dy = 0; dy < block; ++dy) {
        g.groups[q].push_back(static_cast<int>(g.sites.size()));
        g.sites.emplace_back(static_cast<double>(corners[q][0] + dx),
                             static_cast<double>(corners[q][1] + dy));
      }
    }
  }
  return g;
}

LatticeGeometry custom_geometry(std::vector<Eigen::Vector2d> sites,
                                std::vector<std::vector<int>> groups) {
  LatticeGeometry g;
  g.shape = LatticeShape::Custom;
  g.shape_tag = "custom";
  g.sites = std::move(sites);
  if (groups.empty()) {
    groups.resize(g.sites.size());
    for (std::size_t i = 0; i < g.sites.size(); ++i) groups[i] = {static_cast<int>(i)};
  }
  g.groups = std::move(groups);
  for (std::size_t i = 0; i < g.sites.size(); ++i) {
    for (std::size_t j = i + 1; j < g.sites.size(); ++j) {
      if ((g.sites[i] - g.sites[j]).norm() < 1e-12) {
        throw ConfigError("custom_geometry: duplicate site positions");
      }
    }
  }
  return g;
}

int LatticeRealization::occupied_count() const {
  return static_cast<int>(std::count(occupied.begin(), occupied.end(), char(1)));
}

int LatticeRealization::empty_group_count() const {
  int n = 0;
  for (const auto& grp : groups) n += grp.empty() ? 1 : 0;
  return n;
}

std::string LatticeRealization::to_json() const {
  std::ostringstream out;
  out << "{\"seed\":" << seed << ",\"shape\":\"" << geometry.shape_tag << "\",\"sites\":[";
  for (int i = 0; i < geometry.n_sites(); ++i) {
    if (i) out << ",";
    out << "[" << geometry.sites[i].x() << "," << geometry.sites[i].y() << "]";
  }
  out << "],\"occupied\":[";
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    if (i) out << ",";
    out << (occupied[i] ? 1 : 0);
  }
  out << "]}";
  return out.str();
}

LatticeRealization sample_realization(const LatticeGeometry& geometry, double filling,
                                      std::uint64_t seed) {
  if (filling < 0.0 || filling > 1.0) {
    throw ConfigError("sample_realization: filling must be in [0, 1]");
  }
  LatticeRealization r;
  r.geometry = geometry;
  r.seed = seed;
  r.occupied.assign(geometry.sites.size(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < r.occupied.size(); ++i) {
    r.occupied[i] = rng.uniform01() < filling ? 1 : 0;
  }
  r.groups.resize(geometry.groups.size());
  for (std::size_t g = 0; g < geometry.groups.size(); ++g) {
    for (int site : geometry.groups[g]) {
      if (r.occupied[site]) r.groups[g].push_back(site);
    }
  }
  return r;
}

int SuperAtomChain::active_count() const {
  int n = 0;
  for (int occ : occupancy) n += occ > 0 ? 1 : 0;
  return n;
}

std::uint32_t SuperAtomChain::active_mask() const {
  std::uint32_t mask = 0;
  for (int u = 0; u < n_units; ++u) {
    if (occupancy[u] > 0) mask |= (1u << u);
  }
  return mask;
}

SuperAtomChain reduce_to_superatoms(const LatticeRealization& realization,
                                    const PhysicalModel& model, double blockade_bound_um) {
  const double bound = blockade_bound_um > 0.0 ? blockade_bound_um
                                               : 8.0 * model.lattice_spacing;
  SuperAtomChain chain;
  chain.n_units = static_cast<int>(realization.groups.size());
  chain.enhancements.resize(chain.n_units);
  chain.occupancy.resize(chain.n_units);
  chain.centers.resize(chain.n_units);
  const double a = model.lattice_spacing;
  for (int u = 0; u < chain.n_units; ++u) {
    const auto& members = realization.groups[u];
    chain.occupancy[u] = static_cast<int>(members.size());
    chain.enhancements[u] = std::sqrt(static_cast<double>(members.size()));
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    if (members.empty()) {
      // Dead unit: fall back to the nominal group center so the chain
      // geometry stays well defined.
      for (int site : realization.geometry.groups[u]) {
        center += realization.geometry.sites[site];
      }
      center /= static_cast<double>(realization.geometry.groups[u].size());
    } else {
      for (int site : members) center += realization.geometry.sites[site];
      center /= static_cast<double>(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const double d =
              (realization.geometry.sites[members[i]] - realization.geometry.sites[members[j]])
                  .norm() *
              a;
          if (d > bound) {
            throw ConfigError("reduce_to_superatoms: group " + std::to_string(u) +
                              " exceeds the blockade radius bound; the super-atom "
                              "picture does not apply");
          }
        }
      }
    }
    chain.centers[u] = center * a;
  }
  return chain;
}

}  // namespace rydopt
