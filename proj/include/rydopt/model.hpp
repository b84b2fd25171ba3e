#pragma once

namespace rydopt {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Internal unit system: lengths in um, times in us, energies as angular
// frequencies in rad/us (hbar = 1). Configs and reports use plain
// frequencies in MHz; the 2*pi lives at this boundary and nowhere else.
inline constexpr double mhz_to_rad_us(double nu_mhz) { return kTwoPi * nu_mhz; }
inline constexpr double rad_us_to_mhz(double omega) { return omega / kTwoPi; }

struct PhysicalModel {
  double c6_over_hbar = 0.0;  // van der Waals coefficient, rad/us * um^6
  double lattice_spacing = 0.532;  // um
  double gamma_decay = 0.0118;     // single-atom radiative decay rate, 1/us
};

// The 43S_1/2 Rydberg-state constants of 87Rb, converted once to internal units.
PhysicalModel default_model();

// Pair interaction C6/(hbar r^6) in rad/us. Throws for r <= 0: two atoms
// cannot occupy one site.
double vdw_interaction(const PhysicalModel& model, double r_um);

}  // namespace rydopt
