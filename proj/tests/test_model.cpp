#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rydopt/errors.hpp"
#include "rydopt/model.hpp"

using namespace rydopt;

TEST_CASE("default model carries the 43S constants in internal units") {
  const PhysicalModel m = default_model();
  CHECK(m.gamma_decay == doctest::Approx(0.0118).epsilon(1e-12));
  CHECK(m.lattice_spacing == doctest::Approx(0.532).epsilon(1e-12));

  // Cross-check of the two published constants: C6/hbar at r = 8a must come
  // out at 2pi x 0.4125 MHz.
  const double r = 8.0 * m.lattice_spacing;
  const double v = vdw_interaction(m, r);
  CHECK(std::abs(v - mhz_to_rad_us(0.4125)) / mhz_to_rad_us(0.4125) < 1e-3);
}

TEST_CASE("vdw interaction scales as r^-6") {
  const PhysicalModel m = default_model();
  const double v8 = vdw_interaction(m, 8.0 * m.lattice_spacing);
  CHECK(vdw_interaction(m, 16.0 * m.lattice_spacing) == doctest::Approx(v8 / 64.0));
  // (sqrt 2)^6 = 8
  CHECK(vdw_interaction(m, 8.0 * std::sqrt(2.0) * m.lattice_spacing) ==
        doctest::Approx(v8 / 8.0));

  // Strictly decreasing on a grid.
  double prev = vdw_interaction(m, 0.25);
  for (double r = 0.5; r < 20.0; r += 0.25) {
    const double v = vdw_interaction(m, r);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("zero or negative distances are rejected") {
  const PhysicalModel m = default_model();
  CHECK_THROWS_AS(vdw_interaction(m, 0.0), UsageError);
  CHECK_THROWS_AS(vdw_interaction(m, -1.0), UsageError);
}
