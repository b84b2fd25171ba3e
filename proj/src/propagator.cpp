#include "rydopt/propagator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "rydopt/errors.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

namespace {

using Complex = std::complex<double>;

// Reusable Lanczos workspace for the step propagator. The per-step subspace
// size adapts to the a-posteriori defect estimate; steps are bisected when
// the basis cap is hit, which only happens for pathological tolerances.
struct KrylovWorkspace {
  std::vector<Eigen::VectorXcd> v;
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXcd w;
  Eigen::VectorXd diag;  // diagonal of H at the current controls
  int last_m = 4;

  Eigen::VectorXcd& vec(int j, int dim) {
    while (static_cast<int>(v.size()) <= j) v.emplace_back(Eigen::VectorXcd(dim));
    return v[j];
  }
};

void apply_with_diag(const HamiltonianTerms& terms, const Eigen::VectorXd& diag,
                     double half_omega, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  y.array() = diag.array() * x.array();
  if (half_omega != 0.0) {
    const std::size_t m = terms.edges.size();
    const int* lo = terms.edges.lo.data();
    const int* hi = terms.edges.hi.data();
    const std::int32_t* unit = terms.edges.unit.data();
    const double* enh = terms.unit_enhancement.data();
    Complex* yp = y.data();
    const Complex* xp = x.data();
    for (std::size_t e = 0; e < m; ++e) {
      const double c = half_omega * enh[unit[e]];
      yp[lo[e]] += c * xp[hi[e]];
      yp[hi[e]] += c * xp[lo[e]];
    }
  }
}

// y = exp(-i dt T_m) e1 for the current tridiagonal. The defect that feeds
// the error estimate is the last component of y; because it oscillates in
// time it is sampled at several points inside the step and the maximum is
// returned.
double tridiag_exp_e1(const std::vector<double>& alpha, const std::vector<double>& beta,
                      int m, double dt, Eigen::VectorXcd& y) {
  Eigen::VectorXd d(m), e(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) d[i] = alpha[i];
  for (int i = 0; i + 1 < m; ++i) e[i] = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& u = es.eigenvectors();
  const Eigen::VectorXd& theta = es.eigenvalues();
  y.resize(m);
  Eigen::VectorXcd phases(m);
  for (int i = 0; i < m; ++i) {
    phases[i] = std::exp(Complex(0.0, -dt * theta[i])) * u(0, i);
  }
  for (int r = 0; r < m; ++r) {
    Complex acc = 0.0;
    for (int i = 0; i < m; ++i) acc += u(r, i) * phases[i];
    y[r] = acc;
  }
  double defect = std::abs(y[m - 1]);
  for (const double frac : {0.25, 0.5, 0.75}) {
    Complex acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += u(m - 1, i) * std::exp(Complex(0.0, -frac * dt * theta[i])) * u(0, i);
    }
    defect = std::max(defect, std::abs(acc));
  }
  return defect;
}

// One unitary substep psi <- exp(-i H dt) psi via the Lanczos approximation.
// `depth` guards the bisection recursion.
void krylov_substep(const HamiltonianTerms& terms, double half_omega, double dt,
                    Eigen::VectorXcd& psi, KrylovWorkspace& ws, double tol, int depth) {
  if (depth > 24) {
    throw NumericalError("evolve: step bisection failed to converge");
  }
  const int dim = terms.dim();
  const int m_cap = std::min(dim, 120);

  const double beta0 = psi.norm();
  if (beta0 == 0.0) throw NumericalError("evolve: zero state");
  ws.vec(0, dim) = psi / beta0;
  ws.alpha.assign(m_cap, 0.0);
  ws.beta.assign(m_cap, 0.0);

  Eigen::VectorXcd y, y_prev;
  int m = 0, m_prev = 0;
  bool converged = false;
  bool breakdown = false;
  // Start checking near the previous step's converged size.
  int next_check = std::max(2, ws.last_m - 2);
  double scale = 0.0;

  while (m < m_cap) {
    Eigen::VectorXcd& vj = ws.v[m];
    apply_with_diag(terms, ws.diag, half_omega, vj, ws.w);
    const double a = std::real(vj.dot(ws.w));
    ws.alpha[m] = a;
    ws.w -= a * vj;
    if (m > 0) ws.w -= ws.beta[m - 1] * ws.v[m - 1];
    // Full reorthogonalization; repeat once if cancellation was severe.
    for (int pass = 0; pass < 2; ++pass) {
      double correction = 0.0;
      for (int i = 0; i <= m; ++i) {
        const Complex c = ws.v[i].dot(ws.w);
        ws.w -= c * ws.v[i];
        correction += std::norm(c);
      }
      if (pass == 0 && correction < 1e-14 * ws.w.squaredNorm()) break;
    }
    const double b = ws.w.norm();
    ws.beta[m] = b;
    ++m;
    scale = std::max({scale, std::abs(a), b});

    if (b <= 1e-13 * std::max(scale, 1.0)) {
      breakdown = true;  // Krylov space is exact
      break;
    }
    if (m >= next_check || m == m_cap) {
      const double last = tridiag_exp_e1(ws.alpha, ws.beta, m, dt, y);
      const double defect = std::abs(b) * dt * last;
      // The in-step defect oscillates too fast to sample reliably for stiff
      // spectra, so additionally require agreement between successive Krylov
      // orders before accepting the step.
      double order_diff = 2.0;
      if (m_prev > 0) {
        order_diff = 0.0;
        for (int i = 0; i < m; ++i) {
          const Complex prev = i < m_prev ? y_prev[i] : Complex(0.0);
          order_diff += std::norm(y[i] - prev);
        }
        order_diff = std::sqrt(order_diff);
      }
      y_prev = y;
      m_prev = m;
      if (defect < tol && order_diff < tol) {
        converged = true;
        break;
      }
      next_check = m + std::max(2, m / 8);
    }
    if (m < m_cap) ws.vec(m, dim) = ws.w / b;
  }

  if (!converged && !breakdown) {
    // Subspace cap hit: bisect the step.
    ws.last_m = m_cap;
    krylov_substep(terms, half_omega, 0.5 * dt, psi, ws, 0.5 * tol, depth + 1);
    krylov_substep(terms, half_omega, 0.5 * dt, psi, ws, 0.5 * tol, depth + 1);
    return;
  }
  tridiag_exp_e1(ws.alpha, ws.beta, m, dt, y);
  ws.last_m = std::max(2, m);

  psi.setZero();
  for (int j = 0; j < m; ++j) psi += (beta0 * y[j]) * ws.v[j];
}

void krylov_step(const HamiltonianTerms& terms, double omega, double delta, double dt,
                 Eigen::VectorXcd& psi, KrylovWorkspace& ws, double tol) {
  ws.diag = terms.diag_interaction -
            delta * terms.excitation_count.cast<double>().matrix();
  krylov_substep(terms, 0.5 * omega, dt, psi, ws, tol, 0);
}

double excitation_expectation(const HamiltonianTerms& terms, const Eigen::VectorXcd& psi) {
  double acc = 0.0;
  for (int i = 0; i < psi.size(); ++i) {
    acc += terms.excitation_count[i] * std::norm(psi[i]);
  }
  return acc;
}

}  // namespace

Trajectory evolve(const QuantumState& psi0, const HamiltonianTerms& terms,
                  const SampledPulse& pulse, const RecordPolicy& record) {
  if (!psi0.basis || !terms.basis || !psi0.basis->same_space(*terms.basis)) {
    throw UsageError("evolve: state and Hamiltonian live on different bases");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-9) {
    throw UsageError("evolve: initial state is not normalized");
  }
  const int n_steps = pulse.n_steps();
  if (n_steps < 1) throw UsageError("evolve: pulse has no steps");

  int record_every = 0;
  if (record.interval > 0.0) {
    const double ratio = record.interval / pulse.dt;
    record_every = static_cast<int>(std::llround(ratio));
    if (record_every < 1 || std::abs(ratio - record_every) > 1e-6) {
      throw UsageError("evolve: record interval must be an integer multiple of pulse dt");
    }
  }

  Trajectory traj;
  Eigen::VectorXcd psi = psi0.amplitudes;
  KrylovWorkspace ws;

  auto record_point = [&](int step) {
    traj.times.push_back(step * pulse.dt);
    traj.excitation_number.push_back(excitation_expectation(terms, psi));
    traj.norms.push_back(psi.norm());
    if (record.store_states) traj.states.push_back(psi);
  };
  record_point(0);

  constexpr double kStepTol = 1e-12;
  for (int j = 0; j < n_steps; ++j) {
    const double omega = 0.5 * (pulse.omega[j] + pulse.omega[j + 1]);
    const double delta = 0.5 * (pulse.delta[j] + pulse.delta[j + 1]);
    krylov_step(terms, omega, delta, pulse.dt, psi, ws, kStepTol);
    const bool at_record = record_every > 0 && (j + 1) % record_every == 0;
    if (at_record || j + 1 == n_steps) {
      const double drift = std::abs(psi.norm() - 1.0);
      if (drift > 1e-6) {
        throw NumericalError("evolve: norm drift " + std::to_string(drift) +
                             " exceeds 1e-6; reduce the step size");
      }
      if (j + 1 < n_steps || at_record) record_point(j + 1);
    }
  }
  if (traj.times.empty() || traj.times.back() != n_steps * pulse.dt) {
    record_point(n_steps);
  }

  traj.final_state.basis = psi0.basis;
  traj.final_state.amplitudes = std::move(psi);
  return traj;
}

EigenPairs dressed_low_spectrum(const HamiltonianTerms& terms, double omega, double delta,
                                int k, const LanczosOptions& options) {
  const int dim = terms.dim();
  if (k < 1 || k > dim) throw UsageError("dressed_low_spectrum: need 1 <= k <= dim");

  const double scale = std::max(terms.norm_bound(omega, delta), 1e-12);
  const double tol = options.rel_tol * scale;
  // Converging a small buffer beyond k guards the k-th pair against
  // misconvergence onto a higher branch.
  const int k_buf = std::min(dim, k + 2);

  const int m_cap = std::min(dim, std::max(options.max_basis, 2 * k_buf + 12));
  std::vector<Eigen::VectorXcd> basis;  // orthonormal search space
  basis.reserve(m_cap);

  Rng rng(options.start_seed);
  auto random_vector = [&]() {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) {
      v[i] = Complex(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
    }
    return v;
  };

  // Orthonormalize v against `basis`; false when it vanishes.
  auto push_orthonormal = [&](Eigen::VectorXcd v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const double nrm = v.norm();
    if (nrm < 1e-10) return false;
    basis.push_back(v / nrm);
    return true;
  };

  if (options.warm_start && options.warm_start->size() == dim &&
      options.warm_start->norm() > 0.0) {
    push_orthonormal(*options.warm_start);
  }
  // A random admixture keeps the search space from being trapped in the
  // invariant subspace of a warm start that is itself an eigenvector.
  push_orthonormal(random_vector());
  while (basis.empty()) push_orthonormal(random_vector());

  int matvecs = 0;
  std::vector<Eigen::VectorXcd> h_basis;
  h_basis.reserve(m_cap);
  Eigen::MatrixXcd proj;  // projected Hamiltonian, grown incrementally

  auto extend_projection = [&]() {
    const int m = static_cast<int>(basis.size());
    while (static_cast<int>(h_basis.size()) < m) {
      const int j = static_cast<int>(h_basis.size());
      h_basis.emplace_back(apply_hamiltonian(terms, omega, delta, basis[j]));
      ++matvecs;
    }
    Eigen::MatrixXcd grown = Eigen::MatrixXcd::Zero(m, m);
    if (proj.rows() > 0) grown.topLeftCorner(proj.rows(), proj.cols()) = proj;
    for (int r = proj.rows(); r < m; ++r) {
      for (int c = 0; c <= r; ++c) {
        const Complex val = basis[c].dot(h_basis[r]);
        grown(c, r) = val;
        grown(r, c) = std::conj(val);
      }
    }
    proj = std::move(grown);
  };

  Eigen::VectorXd ritz_values;
  Eigen::MatrixXcd ritz_vectors;
  int stagnation = 0;
  double best_max_residual = 1e300;

  for (int cycle = 0; cycle < options.max_cycles; ++cycle) {
    // Expand with H times the newest direction until the cap.
    while (static_cast<int>(basis.size()) < m_cap) {
      extend_projection();
      if (!push_orthonormal(h_basis.back())) {
        if (!push_orthonormal(random_vector())) break;
      }
      if (static_cast<int>(basis.size()) >= m_cap) break;
    }
    extend_projection();

    const int m = static_cast<int>(basis.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(proj);
    const int n_keep = std::min(m, k_buf);
    ritz_values = es.eigenvalues().head(n_keep);
    ritz_vectors.resize(dim, n_keep);
    for (int i = 0; i < n_keep; ++i) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (int j = 0; j < m; ++j) v += es.eigenvectors()(j, i) * basis[j];
      ritz_vectors.col(i) = v.normalized();
    }

    // True residuals decide convergence.
    double max_residual = 0.0;
    Eigen::VectorXcd worst;
    for (int i = 0; i < n_keep; ++i) {
      Eigen::VectorXcd r = apply_hamiltonian(terms, omega, delta, ritz_vectors.col(i));
      ++matvecs;
      r -= ritz_values[i] * ritz_vectors.col(i);
      const double rn = r.norm();
      if (rn > max_residual) {
        max_residual = rn;
        worst = std::move(r);
      }
    }
    // A search space spanning everything is exact by construction.
    if (m >= dim || (n_keep == k_buf && max_residual < tol)) {
      EigenPairs out;
      const int n_out = std::min(k, n_keep);
      out.values = ritz_values.head(n_out);
      out.vectors = ritz_vectors.leftCols(n_out);
      out.matvecs = matvecs;
      return out;
    }

    if (max_residual > 0.5 * best_max_residual) {
      ++stagnation;
    } else {
      stagnation = 0;
    }
    best_max_residual = std::min(best_max_residual, max_residual);

    // Thick restart: keep the Ritz block plus a few followers, then continue
    // from the worst residual direction (plus a random kick on stagnation,
    // which also resolves degenerate clusters).
    const int n_follow = std::min(m - 1, k_buf + 8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_full(proj);
    std::vector<Eigen::VectorXcd> restart;
    for (int i = 0; i < n_follow; ++i) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (int j = 0; j < m; ++j) v += es_full.eigenvectors()(j, i) * basis[j];
      restart.push_back(std::move(v));
    }
    basis.clear();
    h_basis.clear();
    proj.resize(0, 0);
    for (auto& v : restart) push_orthonormal(std::move(v));
    if (worst.size() == dim) push_orthonormal(std::move(worst));
    if (stagnation >= 3) {
      push_orthonormal(random_vector());
      stagnation = 0;
    }
    if (basis.empty()) push_orthonormal(random_vector());
  }
  throw NumericalError("dressed_low_spectrum: eigensolver failed to converge within the "
                       "cycle cap");
}

std::vector<AdiabaticityPoint> adiabaticity_trace(const Trajectory& trajectory,
                                                  const HamiltonianTerms& terms,
                                                  const SampledPulse& pulse, int k) {
  if (trajectory.states.size() != trajectory.times.size() || trajectory.states.empty()) {
    throw UsageError("adiabaticity_trace: trajectory must be recorded with states");
  }
  k = std::max(k, 2);
  std::vector<AdiabaticityPoint> out;
  out.reserve(trajectory.times.size());

  Eigen::VectorXcd prev_ground;
  for (std::size_t r = 0; r < trajectory.times.size(); ++r) {
    const double t = trajectory.times[r];
    const int j = std::min<int>(static_cast<int>(std::llround(t / pulse.dt)),
                                pulse.n_steps());
    const double omega = pulse.omega[j];
    const double delta = pulse.delta[j];

    LanczosOptions opt;
    opt.warm_start = prev_ground.size() ? &prev_ground : nullptr;
    const EigenPairs pairs =
        dressed_low_spectrum(terms, omega, delta, std::min(k, terms.dim()), opt);

    const Eigen::VectorXcd& psi = trajectory.states[r];
    const Eigen::VectorXcd hpsi = apply_hamiltonian(terms, omega, delta, psi);
    Eigen::VectorXcd ground = pairs.vectors.col(0);
    // Overlap-aligned phase keeps the tracked vector continuous in time.
    if (prev_ground.size()) {
      const Complex ov = prev_ground.dot(ground);
      if (std::abs(ov) > 0.0) ground *= std::conj(ov) / std::abs(ov);
    }
    prev_ground = ground;

    AdiabaticityPoint p;
    p.time = t;
    p.energy = std::real(psi.dot(hpsi));
    p.ground_energy = pairs.values[0];
    p.gap = pairs.values.size() > 1 ? pairs.values[1] - pairs.values[0] : 0.0;
    p.ground_overlap = std::norm(ground.dot(psi));
    out.push_back(p);
  }
  return out;
}

}  // namespace rydopt
