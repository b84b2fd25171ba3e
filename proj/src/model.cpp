#include "rydopt/model.hpp"

#include "rydopt/errors.hpp"

namespace rydopt {

namespace {
constexpr double kHbarSI = 1.054571817e-34;  // J s
constexpr double kC6SI = 1.625e-60;          // J m^6, 43S_1/2 of 87Rb
// (m^6/s) -> (um^6/us): 1e36 um^6 per m^6 over 1e6 us per s.
constexpr double kM6PerS_to_Um6PerUs = 1e30;
}  // namespace

PhysicalModel default_model() {
  PhysicalModel m;
  m.c6_over_hbar = kC6SI / kHbarSI * kM6PerS_to_Um6PerUs;
  m.lattice_spacing = 0.532;
  m.gamma_decay = 0.0118;
  return m;
}

double vdw_interaction(const PhysicalModel& model, double r_um) {
  if (!(r_um > 0.0)) {
    throw UsageError("vdw_interaction: pair distance must be positive");
  }
  const double r2 = r_um * r_um;
  const double r6 = r2 * r2 * r2;
  return model.c6_over_hbar / r6;
}

}  // namespace rydopt
