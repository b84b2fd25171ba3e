#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "rydopt/errors.hpp"
#include "rydopt/propagator.hpp"
#include "rydopt/rng.hpp"

using namespace rydopt;
using Complex = std::complex<double>;

namespace {

SampledPulse constant_pulse(double omega, double delta, double duration, double dt) {
  SampledPulse p;
  p.dt = dt;
  const int n = static_cast<int>(std::llround(duration / dt));
  p.omega.assign(n + 1, omega);
  p.delta.assign(n + 1, delta);
  return p;
}

struct System {
  SuperAtomChain chain;
  std::shared_ptr<const ManyBodyBasis> basis;
  HamiltonianTerms terms;
};

System make_system(const LatticeGeometry& geometry, const Truncation& trunc = {}) {
  System s;
  const PhysicalModel model = default_model();
  s.chain = oracles::perfect_chain(geometry, model);
  s.basis = build_basis(s.chain, trunc);
  s.terms = assemble(s.chain, s.basis, model);
  return s;
}

Eigen::VectorXcd random_state(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = Complex(2 * rng.uniform01() - 1, 2 * rng.uniform01() - 1);
  }
  return v.normalized();
}

}  // namespace

TEST_CASE("single unit resonant Rabi flopping matches sin^2") {
  const System s = make_system(build_bar(1, 1));
  const double omega = mhz_to_rad_us(0.4);
  const SampledPulse pulse = constant_pulse(omega, 0.0, 2.5, 1e-3);
  RecordPolicy rec;
  rec.interval = 0.01;
  rec.store_states = true;
  const Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse, rec);
  const int ie = s.basis->index(1);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const double pe = std::norm(traj.states[r][ie]);
    const double expect = std::pow(std::sin(0.5 * omega * traj.times[r]), 2);
    CHECK(std::abs(pe - expect) < 1e-9);
  }
  // Half Rabi period: full inversion.
  const Trajectory half =
      evolve(ground_config(s.basis), s.terms, constant_pulse(omega, 0.0, kPi / omega, 1e-3));
  CHECK(std::norm(half.final_state.amplitudes[ie]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two units deep in blockade: sqrt(2)-enhanced oscillation") {
  // Two single-atom units one lattice constant apart; V/Omega ~ 3e5.
  const System s = make_system(build_bar(1, 2));
  const double omega = mhz_to_rad_us(0.4);
  const double v = s.terms.diag_interaction[s.basis->index(0b11)];
  const SampledPulse pulse = constant_pulse(omega, 0.0, 4.0, 1e-3);
  RecordPolicy rec;
  rec.interval = 1e-3;
  rec.store_states = true;
  const Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse, rec);

  // Population returns to |gg> with frequency sqrt(2) Omega: find the first
  // minimum of P_gg and refine parabolically.
  const int ig = s.basis->index(0);
  std::size_t imin = 0;
  double pmin = 2.0;
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const double pg = std::norm(traj.states[r][ig]);
    if (pg < pmin) {
      pmin = pg;
      imin = r;
    }
    if (pg > 0.9 && pmin < 0.1) break;  // passed the first dip
  }
  REQUIRE(imin > 0);
  const auto pg_at = [&](std::size_t r) { return std::norm(traj.states[r][ig]); };
  const double y0 = pg_at(imin - 1), y1 = pg_at(imin), y2 = pg_at(imin + 1);
  const double shift = 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2);
  const double t_min = traj.times[imin] + shift * 1e-3;
  const double freq = kPi / t_min;  // first P_gg zero of cos^2 at t = pi/freq
  CHECK(std::abs(freq - std::sqrt(2.0) * omega) / (std::sqrt(2.0) * omega) < 0.005);

  // Double excitation stays below the perturbative bound.
  double pee_max = 0;
  const int iee = s.basis->index(0b11);
  for (const auto& st : traj.states) pee_max = std::max(pee_max, std::norm(st[iee]));
  CHECK(pee_max < 4.0 * std::pow(omega / v, 2));
}

TEST_CASE("diagonal evolution acquires exact phases") {
  const System s = make_system(build_bar(1, 3));
  const double delta = mhz_to_rad_us(0.8);
  const double t = 1.0;
  const SampledPulse pulse = constant_pulse(0.0, delta, t, 1e-3);
  QuantumState psi0{s.basis, Eigen::VectorXcd::Zero(s.basis->size())};
  const int i0 = s.basis->index(0b000), i1 = s.basis->index(0b101);
  psi0.amplitudes[i0] = 1.0 / std::sqrt(2.0);
  psi0.amplitudes[i1] = 1.0 / std::sqrt(2.0);
  const Trajectory traj = evolve(psi0, s.terms, pulse);
  // amplitude phase: exp(-i (E_int - delta N_e) t)
  const double e1 = s.terms.diag_interaction[i1] - delta * 2;
  const Complex expect = std::exp(Complex(0, -e1 * t)) / std::sqrt(2.0);
  CHECK(std::abs(traj.final_state.amplitudes[i1] - expect) < 1e-9);
  CHECK(std::abs(traj.final_state.amplitudes[i0] - 1.0 / std::sqrt(2.0)) < 1e-9);
}

TEST_CASE("time-dependent pulse matches stepwise dense-oracle propagation") {
  const System s = make_system(build_bar(3, 4));
  const PhysicalModel model = default_model();
  ControlConstraints cons;
  PulseParams params;
  params.duration = 0.5;
  params.guess.kind = GuessPulse::Kind::Chirp;
  params.guess.omega_peak = cons.omega_max;
  params.guess.delta_start = mhz_to_rad_us(-1.0);
  params.guess.delta_end = mhz_to_rad_us(1.0);
  params.omega_freqs_mhz = draw_basis(5, 2, cons.omega_bandwidth_mhz, 0.5);
  params.delta_freqs_mhz = draw_basis(6, 2, cons.delta_bandwidth_mhz, 0.5);
  params.coeffs = Eigen::VectorXd::Constant(8, 0.3);
  const SampledPulse pulse = synthesize(params, cons, 1e-3);

  const Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse);

  // Oracle: piecewise-constant dense expm with the same midpoint controls.
  Eigen::VectorXcd psi = ground_config(s.basis).amplitudes;
  for (int j = 0; j < pulse.n_steps(); ++j) {
    const double om = 0.5 * (pulse.omega[j] + pulse.omega[j + 1]);
    const double de = 0.5 * (pulse.delta[j] + pulse.delta[j + 1]);
    const Eigen::MatrixXcd h =
        oracles::dense_hamiltonian(s.chain, s.basis->configs, model, om, de);
    psi = oracles::dense_evolve(h, psi, pulse.dt);
  }
  CHECK((traj.final_state.amplitudes - psi).norm() < 1e-8);
}

TEST_CASE("unitarity: norm drift stays tiny over long evolutions") {
  const System s = make_system(build_bar(3, 6));
  const SampledPulse pulse =
      constant_pulse(mhz_to_rad_us(0.4), mhz_to_rad_us(0.7), 10.0, 1e-3);
  const Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse);
  CHECK(std::abs(traj.final_state.norm() - 1.0) < 1e-8);  // < 1e-9/us
}

TEST_CASE("energy conservation under frozen controls") {
  const System s = make_system(build_bar(3, 5));
  const double omega = mhz_to_rad_us(0.35), delta = mhz_to_rad_us(0.9);
  const SampledPulse pulse = constant_pulse(omega, delta, 10.0, 1e-3);
  QuantumState psi0{s.basis, random_state(s.basis->size(), 5)};
  RecordPolicy rec;
  rec.interval = 0.5;
  rec.store_states = true;
  const Trajectory traj = evolve(psi0, s.terms, pulse, rec);
  const auto energy = [&](const Eigen::VectorXcd& v) {
    return std::real(v.dot(apply_hamiltonian(s.terms, omega, delta, v)));
  };
  const double e0 = energy(traj.states.front());
  for (const auto& st : traj.states) {
    CHECK(std::abs(energy(st) - e0) < 1e-6 * std::max(1.0, std::abs(e0)));
  }
}

TEST_CASE("linearity of the propagation map") {
  const System s = make_system(build_bar(1, 4));
  const SampledPulse pulse =
      constant_pulse(mhz_to_rad_us(0.4), mhz_to_rad_us(-0.3), 1.0, 1e-3);
  const Eigen::VectorXcd va = random_state(s.basis->size(), 1);
  const Eigen::VectorXcd vb = random_state(s.basis->size(), 2);
  const Complex ca(0.6, 0.2), cb(-0.3, 0.7);
  Eigen::VectorXcd vc = ca * va + cb * vb;
  const double nc = vc.norm();
  vc /= nc;

  const auto run = [&](const Eigen::VectorXcd& v) {
    return evolve(QuantumState{s.basis, v}, s.terms, pulse).final_state.amplitudes;
  };
  const Eigen::VectorXcd expect = (ca * run(va) + cb * run(vb)) / nc;
  CHECK((run(vc) - expect).norm() < 1e-9);
}

TEST_CASE("convergence order: midpoint-sampled steps are second order") {
  // Error against a dt/8 reference shrinks ~4x when dt halves. The chirp is
  // synthesized pointwise, so every dt samples the same continuous control.
  const System s = make_system(build_bar(1, 3));
  ControlConstraints cons;
  const auto fine = linear_chirp_reference(1.0, mhz_to_rad_us(-1), mhz_to_rad_us(1),
                                           cons.omega_max, cons, 1.25e-4);
  const auto mid = linear_chirp_reference(1.0, mhz_to_rad_us(-1), mhz_to_rad_us(1),
                                          cons.omega_max, cons, 1e-3);
  const auto coarse = linear_chirp_reference(1.0, mhz_to_rad_us(-1), mhz_to_rad_us(1),
                                             cons.omega_max, cons, 2e-3);
  const auto run = [&](const SampledPulse& p) {
    return evolve(ground_config(s.basis), s.terms, p).final_state.amplitudes;
  };
  const Eigen::VectorXcd ref = run(fine);
  const double err_coarse = (run(coarse) - ref).norm();
  const double err_mid = (run(mid) - ref).norm();
  REQUIRE(err_coarse > 1e-12);  // not already at roundoff
  const double order = std::log2(err_coarse / err_mid);
  CHECK(order > 1.6);
  CHECK(order < 2.6);
}

TEST_CASE("norm and basis misuse raise typed errors") {
  const System s = make_system(build_bar(1, 2));
  QuantumState bad{s.basis, Eigen::VectorXcd::Zero(s.basis->size())};
  bad.amplitudes[0] = 2.0;  // not normalized
  CHECK_THROWS_AS(evolve(bad, s.terms, constant_pulse(1, 0, 0.1, 1e-3)), UsageError);

  const System other = make_system(build_bar(1, 3));
  CHECK_THROWS_AS(
      evolve(ground_config(other.basis), s.terms, constant_pulse(1, 0, 0.1, 1e-3)),
      UsageError);

  RecordPolicy rec;
  rec.interval = 0.0005;  // not a multiple of dt
  CHECK_THROWS_AS(
      evolve(ground_config(s.basis), s.terms, constant_pulse(1, 0, 0.1, 1e-3), rec),
      UsageError);
}

TEST_CASE("dressed low spectrum") {
  SUBCASE("omega = 0 reduces to the classical spectrum") {
    const System s = make_system(build_bar(3, 5));
    const double delta = mhz_to_rad_us(0.6);
    const EigenPairs pairs = dressed_low_spectrum(s.terms, 0.0, delta, 4);
    const auto classical = classical_spectrum(s.terms, delta);
    for (int k = 0; k < 4; ++k) {
      CHECK(pairs.values[k] == doctest::Approx(classical[k].energy).epsilon(1e-9));
    }
  }

  SUBCASE("single unit at resonance: +/- Omega/2") {
    const System s = make_system(build_bar(1, 1));
    const double omega = mhz_to_rad_us(0.4);
    const EigenPairs pairs = dressed_low_spectrum(s.terms, omega, 0.0, 2);
    CHECK(pairs.values[0] == doctest::Approx(-omega / 2).epsilon(1e-10));
    CHECK(pairs.values[1] == doctest::Approx(omega / 2).epsilon(1e-10));
  }

  SUBCASE("N=8 chain mid-sweep matches dense diagonalization") {
    const System s = make_system(build_bar(3, 8));
    const PhysicalModel model = default_model();
    const double omega = mhz_to_rad_us(0.4), delta = mhz_to_rad_us(0.5);
    const EigenPairs pairs = dressed_low_spectrum(s.terms, omega, delta, 6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        oracles::dense_hamiltonian(s.chain, s.basis->configs, model, omega, delta));
    const double scale = std::abs(es.eigenvalues()[s.basis->size() - 1]);
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(pairs.values[k] - es.eigenvalues()[k]) < 1e-8 * scale);
    }
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXcd r =
          apply_hamiltonian(s.terms, omega, delta, Eigen::VectorXcd(pairs.vectors.col(k))) -
          pairs.values[k] * pairs.vectors.col(k);
      CHECK(r.norm() < 1e-8 * s.terms.norm_bound(omega, delta));
    }
  }

  SUBCASE("degenerate levels of the symmetric corner square are all found") {
    const System s = make_system(build_corner_square(10, 2));
    const PhysicalModel model = default_model();
    const double omega = mhz_to_rad_us(0.3);
    const double delta = critical_detuning(s.chain, model);
    const EigenPairs pairs = dressed_low_spectrum(s.terms, omega, delta, 6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        oracles::dense_hamiltonian(s.chain, s.basis->configs, model, omega, delta));
    for (int k = 0; k < 6; ++k) {
      CHECK(pairs.values[k] == doctest::Approx(es.eigenvalues()[k]).epsilon(1e-8));
    }
  }
}

TEST_CASE("adiabaticity trace") {
  SUBCASE("drive-free ground state stays ground: overlap 1") {
    const System s = make_system(build_bar(1, 4));
    const SampledPulse pulse = constant_pulse(0.0, mhz_to_rad_us(-1.0), 1.0, 1e-3);
    RecordPolicy rec;
    rec.interval = 0.1;
    rec.store_states = true;
    const Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse, rec);
    const auto trace = adiabaticity_trace(traj, s.terms, pulse, 2);
    for (const auto& p : trace) {
      CHECK(p.ground_overlap == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(p.energy == doctest::Approx(0.0));
      CHECK(p.gap > 0.0);
    }
  }

  SUBCASE("instantaneous eigenstate tracking reports its own energy") {
    const System s = make_system(build_bar(3, 4));
    ControlConstraints cons;
    const SampledPulse pulse = linear_chirp_reference(
        1.0, mhz_to_rad_us(-1.5), mhz_to_rad_us(1.5), cons.omega_max, cons, 1e-3);
    RecordPolicy rec;
    rec.interval = 0.25;
    rec.store_states = true;
    Trajectory traj = evolve(ground_config(s.basis), s.terms, pulse, rec);
    // Overwrite the stored states with the exact instantaneous ground states.
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
      const int j = static_cast<int>(std::llround(traj.times[r] / pulse.dt));
      const EigenPairs pairs =
          dressed_low_spectrum(s.terms, pulse.omega[j], pulse.delta[j], 1);
      traj.states[r] = pairs.vectors.col(0);
    }
    const auto trace = adiabaticity_trace(traj, s.terms, pulse, 2);
    for (const auto& p : trace) {
      CHECK(p.ground_overlap == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(p.energy == doctest::Approx(p.ground_energy).epsilon(1e-8));
    }
  }
}

TEST_CASE("blockade truncation validity: untruncated leakage is tiny") {
  // Blockade-dominated chain: population on truncation-excluded configs
  // stays below 1e-3 when propagating in the full basis.
  const System full = make_system(build_bar(3, 5));
  const PhysicalModel model = default_model();
  Truncation t;
  t.blockade_radius_um = 3.0 * model.lattice_spacing;
  const auto trunc_basis = build_basis(full.chain, t);
  ControlConstraints cons;
  const SampledPulse pulse = linear_chirp_reference(
      0.3, mhz_to_rad_us(-2), mhz_to_rad_us(2), cons.omega_max, cons, 1e-3);
  const Trajectory traj = evolve(ground_config(full.basis), full.terms, pulse);
  double excluded = 0;
  for (int i = 0; i < full.basis->size(); ++i) {
    if (trunc_basis->index(full.basis->configs[i]) < 0) {
      excluded += std::norm(traj.final_state.amplitudes[i]);
    }
  }
  CHECK(excluded < 1e-3);
}
