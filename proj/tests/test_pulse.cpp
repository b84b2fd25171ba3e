#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "rydopt/errors.hpp"
#include "rydopt/pulse.hpp"
#include "rydopt/rng.hpp"

using namespace rydopt;

namespace {

PulseParams random_params(std::uint64_t seed, const ControlConstraints& cons,
                          double duration) {
  Rng rng(seed);
  PulseParams p;
  p.duration = duration;
  p.guess.kind = GuessPulse::Kind::Chirp;
  p.guess.omega_peak = cons.omega_max * rng.uniform01();
  p.guess.delta_start = -cons.delta_bound * rng.uniform01();
  p.guess.delta_end = cons.delta_bound * rng.uniform01();
  p.omega_freqs_mhz = draw_basis(seed + 1, 3, cons.omega_bandwidth_mhz, duration);
  p.delta_freqs_mhz = draw_basis(seed + 2, 3, cons.delta_bandwidth_mhz, duration);
  p.coeffs = Eigen::VectorXd(12);
  for (int i = 0; i < 12; ++i) {
    const double cap = i < 6 ? cons.omega_max : cons.delta_bound;
    p.coeffs[i] = cap * (4 * rng.uniform01() - 2);  // deliberately beyond the caps
  }
  return p;
}

}  // namespace

TEST_CASE("draw_basis is seeded, sized and cutoff-bounded") {
  const auto f1 = draw_basis(99, 5, 0.5, 4.0);
  const auto f2 = draw_basis(99, 5, 0.5, 4.0);
  CHECK(f1 == f2);
  CHECK(f1.size() == 5);
  for (double f : f1) {
    CHECK(f > 0.0);
    CHECK(f <= 0.5);
  }
  CHECK(draw_basis(100, 5, 0.5, 4.0) != f1);
}

TEST_CASE("synthesis honors constraints sample-wise for random params") {
  const ControlConstraints cons;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const PulseParams p = random_params(seed, cons, 2.0);
    const SampledPulse pulse = synthesize(p, cons, 1e-3);
    for (std::size_t j = 0; j < pulse.omega.size(); ++j) {
      CHECK(pulse.omega[j] >= 0.0);
      CHECK(pulse.omega[j] <= cons.omega_max + 1e-12);
      CHECK(std::abs(pulse.delta[j]) <= cons.delta_bound + 1e-12);
    }
    CHECK(pulse.omega.front() == 0.0);
    CHECK(pulse.omega.back() == 0.0);
  }
}

TEST_CASE("synthesis is deterministic") {
  const ControlConstraints cons;
  const PulseParams p = random_params(7, cons, 3.0);
  const SampledPulse a = synthesize(p, cons, 1e-3);
  const SampledPulse b = synthesize(p, cons, 1e-3);
  CHECK(a.omega == b.omega);
  CHECK(a.delta == b.delta);
}

TEST_CASE("zero coefficients give the envelope-shaped guess") {
  ControlConstraints cons;
  PulseParams p;
  p.duration = 2.0;
  p.guess.kind = GuessPulse::Kind::FlatDelta;
  p.guess.delta_level = mhz_to_rad_us(0.25);
  p.coeffs = Eigen::VectorXd::Zero(0);
  const SampledPulse pulse = synthesize(p, cons, 1e-3);
  for (double om : pulse.omega) CHECK(om == 0.0);
  for (double de : pulse.delta) CHECK(de == doctest::Approx(mhz_to_rad_us(0.25)));
}

TEST_CASE("delta endpoint pinning is exact") {
  ControlConstraints cons;
  cons.delta_end = mhz_to_rad_us(0.4383);
  PulseParams p;
  p.duration = 3.0;
  p.guess.kind = GuessPulse::Kind::FlatDelta;
  p.guess.delta_level = mhz_to_rad_us(-1.0);
  p.delta_freqs_mhz = draw_basis(3, 2, cons.delta_bandwidth_mhz, 3.0);
  p.omega_freqs_mhz = draw_basis(4, 2, cons.omega_bandwidth_mhz, 3.0);
  p.coeffs = Eigen::VectorXd::Constant(8, mhz_to_rad_us(0.3));
  const SampledPulse pulse = synthesize(p, cons, 1e-3);
  CHECK(pulse.delta.back() == doctest::Approx(mhz_to_rad_us(0.4383)).epsilon(1e-12));

  cons.delta_end = mhz_to_rad_us(5.0);  // beyond the bound
  CHECK_THROWS_AS(synthesize(p, cons, 1e-3), ConstraintError);
}

TEST_CASE("amplitude clamp saturates instead of violating") {
  ControlConstraints cons;
  PulseParams p;
  p.duration = 1.0;
  p.omega_freqs_mhz = {1.0};
  p.delta_freqs_mhz = {0.1};
  p.coeffs = Eigen::VectorXd::Zero(4);
  p.coeffs[1] = 3.0 * cons.omega_max;  // cos term driving 3x the cap
  const SampledPulse pulse = synthesize(p, cons, 1e-3);
  double peak = 0;
  for (double om : pulse.omega) peak = std::max(peak, om);
  CHECK(peak == doctest::Approx(cons.omega_max));
}

TEST_CASE("basis frequencies above the cutoff are rejected") {
  ControlConstraints cons;
  PulseParams p;
  p.duration = 1.0;
  p.delta_freqs_mhz = {0.9};  // above the 0.5 MHz delta cutoff
  p.coeffs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(synthesize(p, cons, 1e-3), ConstraintError);
}

TEST_CASE("linear chirp reference") {
  const ControlConstraints cons;
  SUBCASE("standard crystal sweep") {
    const SampledPulse p = linear_chirp_reference(
        4.0, mhz_to_rad_us(-2), mhz_to_rad_us(2), cons.omega_max, cons, 1e-3);
    CHECK(p.duration() == doctest::Approx(4.0));
    CHECK(p.delta.front() == doctest::Approx(mhz_to_rad_us(-2)));
    CHECK(p.delta.back() == doctest::Approx(mhz_to_rad_us(2)));
    CHECK(p.omega.front() == 0.0);
    CHECK(p.omega.back() == 0.0);
    double peak = 0;
    for (double om : p.omega) peak = std::max(peak, om);
    CHECK(peak == doctest::Approx(cons.omega_max).epsilon(1e-6));
    // 10-90 rise time at least the bandwidth-limited minimum.
    CHECK(rise_time(p.omega, p.dt) >= 0.06);
  }
  SUBCASE("constant detuning when start equals end") {
    const SampledPulse p = linear_chirp_reference(
        2.0, mhz_to_rad_us(1), mhz_to_rad_us(1), cons.omega_max, cons, 1e-3);
    for (double de : p.delta) CHECK(de == doctest::Approx(mhz_to_rad_us(1)));
  }
  SUBCASE("zero peak gives trivial drive") {
    const SampledPulse p =
        linear_chirp_reference(2.0, 0, 0, 0.0, cons, 1e-3);
    for (double om : p.omega) CHECK(om == 0.0);
  }
  SUBCASE("peak above the cap is a constraint error") {
    CHECK_THROWS_AS(
        linear_chirp_reference(2.0, 0, 0, 1.1 * cons.omega_max, cons, 1e-3),
        ConstraintError);
  }
}

TEST_CASE("pre-clamp spectrum respects the bandwidth cutoff") {
  // With caps far away the clamp is inactive. Harmonic basis frequencies make
  // the DFT exact, so any content above the cutoff would be injected junk.
  ControlConstraints cons;
  cons.omega_max = 1e6;
  cons.delta_bound = 1e6;
  PulseParams p;
  p.duration = 4.0;
  p.guess.kind = GuessPulse::Kind::Zero;
  p.delta_freqs_mhz = {0.25, 0.5};  // k/tau harmonics at and below the cutoff
  p.coeffs = Eigen::VectorXd::Constant(4, 1.0);
  const SampledPulse pulse = synthesize(p, cons, 1e-3);

  const int n = pulse.n_steps();
  const double df = 1.0 / pulse.duration();  // MHz grid of the DFT
  double below = 0, above = 0;
  for (int k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (int j = 0; j < n; ++j) {
      acc += pulse.delta[j] *
             std::exp(std::complex<double>(0, -2 * kPi * k * j / double(n)));
    }
    const double f = k * df;
    (f <= cons.delta_bandwidth_mhz + 1e-9 ? below : above) += std::norm(acc);
  }
  CHECK(above < 1e-12 * below);
}

TEST_CASE("pulse CSV round trip is exact") {
  const ControlConstraints cons;
  const PulseParams p = random_params(21, cons, 2.0);
  const SampledPulse a = synthesize(p, cons, 1e-3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "rydopt_pulse_test.csv").string();
  write_pulse_csv(a, path);
  const SampledPulse b = read_pulse_csv(path);
  REQUIRE(a.omega.size() == b.omega.size());
  for (std::size_t j = 0; j < a.omega.size(); ++j) {
    CHECK(a.omega[j] == doctest::Approx(b.omega[j]).epsilon(1e-15));
    CHECK(a.delta[j] == doctest::Approx(b.delta[j]).epsilon(1e-15));
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_pulse_csv("/nonexistent/pulse.csv"), ConfigError);
}

TEST_CASE("malformed pulse CSV reports the row") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "rydopt_bad_pulse.csv").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("t_us,omega_over_2pi_mhz,delta_over_2pi_mhz\n0,0,0\n0.001,bogus\n", f);
    std::fclose(f);
  }
  try {
    read_pulse_csv(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  fs::remove(path);
}
