#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "rydopt/errors.hpp"
#include "rydopt/lattice.hpp"

using namespace rydopt;

TEST_CASE("bar geometries") {
  const LatticeGeometry g = build_bar(3, 17);
  CHECK(g.n_sites() == 51);
  CHECK(g.groups.size() == 17);

  const LatticeGeometry single = build_bar(1, 1);
  CHECK(single.n_sites() == 1);
  CHECK(single.sites[0] == Eigen::Vector2d(0, 0));

  // Chain length L = (cols - 1) a.
  const LatticeGeometry n8 = build_bar(3, 8);
  CHECK(n8.n_sites() == 24);
  double xmax = 0;
  for (const auto& s : n8.sites) xmax = std::max(xmax, s.x());
  CHECK(xmax == doctest::Approx(7.0));

  CHECK_THROWS_AS(build_bar(0, 5), ConfigError);
  CHECK_THROWS_AS(build_bar(3, 0), ConfigError);
}

TEST_CASE("corner square geometries") {
  const LatticeGeometry g = build_corner_square(10, 2);
  CHECK(g.n_sites() == 16);
  CHECK(g.groups.size() == 4);
  for (const auto& grp : g.groups) CHECK(grp.size() == 4);

  // All sites distinct.
  std::set<std::pair<double, double>> seen;
  for (const auto& s : g.sites) seen.insert({s.x(), s.y()});
  CHECK(seen.size() == 16);

  // Degenerate but legal: blocks touch.
  CHECK(build_corner_square(4, 2).n_sites() == 16);
  // Single-atom corner qubits.
  const LatticeGeometry q1 = build_corner_square(10, 1);
  CHECK(q1.n_sites() == 4);

  CHECK_THROWS_AS(build_corner_square(3, 2), ConfigError);
}

TEST_CASE("realization sampling is seeded and respects filling") {
  const LatticeGeometry g = build_bar(3, 17);
  const LatticeRealization full = sample_realization(g, 1.0, 42);
  CHECK(full.occupied_count() == 51);
  const LatticeRealization empty = sample_realization(g, 0.0, 42);
  CHECK(empty.occupied_count() == 0);

  const LatticeRealization a = sample_realization(g, 0.9, 1234);
  const LatticeRealization b = sample_realization(g, 0.9, 1234);
  CHECK(a.occupied == b.occupied);
  const LatticeRealization c = sample_realization(g, 0.9, 1235);
  CHECK(a.occupied != c.occupied);

  // Binomial statistics: mean occupancy of 10^4 samples within 3 sigma.
  double total = 0;
  const int n_samples = 10000;
  for (int s = 0; s < n_samples; ++s) {
    total += sample_realization(g, 0.9, 5000 + s).occupied_count();
  }
  const double mean = total / n_samples;
  const double sigma_mean = std::sqrt(51 * 0.9 * 0.1 / n_samples);
  CHECK(std::abs(mean - 45.9) < 3 * sigma_mean);

  // Occupied sites partition into groups.
  int grouped = 0;
  for (const auto& grp : a.groups) grouped += static_cast<int>(grp.size());
  CHECK(grouped == a.occupied_count());
}

TEST_CASE("super-atom reduction") {
  const PhysicalModel model = default_model();
  const LatticeGeometry g = build_bar(3, 17);

  SUBCASE("perfect bar gives sqrt(3) everywhere") {
    const SuperAtomChain chain =
        reduce_to_superatoms(sample_realization(g, 1.0, 7), model);
    CHECK(chain.n_units == 17);
    for (int u = 0; u < 17; ++u) {
      CHECK(chain.enhancements[u] == doctest::Approx(std::sqrt(3.0)));
      CHECK(chain.occupancy[u] == 3);
    }
    // Unit centers are a apart along x.
    for (int u = 0; u + 1 < 17; ++u) {
      CHECK((chain.centers[u + 1] - chain.centers[u]).norm() ==
            doctest::Approx(model.lattice_spacing));
    }
  }

  SUBCASE("perfect corner square gives enhancement 2 and 8a spacing") {
    const SuperAtomChain chain = reduce_to_superatoms(
        sample_realization(build_corner_square(10, 2), 1.0, 7), model);
    CHECK(chain.n_units == 4);
    for (int u = 0; u < 4; ++u) CHECK(chain.enhancements[u] == doctest::Approx(2.0));
    CHECK((chain.centers[1] - chain.centers[0]).norm() ==
          doctest::Approx(8 * model.lattice_spacing));
  }

  SUBCASE("single defect in a column gives sqrt(2)") {
    LatticeRealization r = sample_realization(g, 1.0, 7);
    r.occupied[0] = 0;  // first site of column 0
    r.groups.assign(r.geometry.groups.size(), {});
    for (std::size_t grp = 0; grp < r.geometry.groups.size(); ++grp) {
      for (int site : r.geometry.groups[grp]) {
        if (r.occupied[site]) r.groups[grp].push_back(site);
      }
    }
    const SuperAtomChain chain = reduce_to_superatoms(r, model);
    CHECK(chain.enhancements[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(chain.occupancy[0] == 2);
  }

  SUBCASE("dead units are kept and flagged") {
    const LatticeRealization none = sample_realization(g, 0.0, 7);
    CHECK(none.empty_group_count() == 17);
    const SuperAtomChain chain = reduce_to_superatoms(none, model);
    CHECK(chain.n_units == 17);
    CHECK(chain.active_count() == 0);
    for (int u = 0; u < 17; ++u) CHECK(chain.enhancements[u] == 0.0);
  }

  SUBCASE("groups wider than the blockade bound are rejected") {
    const LatticeGeometry wide = custom_geometry(
        {Eigen::Vector2d(0, 0), Eigen::Vector2d(20, 0)}, {{0, 1}});
    CHECK_THROWS_AS(
        reduce_to_superatoms(sample_realization(wide, 1.0, 1), model), ConfigError);
  }
}

TEST_CASE("unit count is seed-independent at filling 1") {
  const PhysicalModel model = default_model();
  const LatticeGeometry g = build_bar(3, 9);
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const SuperAtomChain chain =
        reduce_to_superatoms(sample_realization(g, 1.0, seed), model);
    CHECK(chain.n_units == 9);
    CHECK(chain.active_count() == 9);
  }
}

TEST_CASE("realization JSON export carries positions, mask and seed") {
  const LatticeGeometry g = build_bar(1, 2);
  const LatticeRealization r = sample_realization(g, 1.0, 31);
  const std::string js = r.to_json();
  CHECK(js.find("\"seed\":31") != std::string::npos);
  CHECK(js.find("\"occupied\":[1,1]") != std::string::npos);
}
