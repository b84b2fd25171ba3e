#include "rydopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <unordered_map>

#include "rydopt/errors.hpp"
#include "rydopt/parallel.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

Ensemble build_ensemble(const OptimizationProblem& problem) {
  if (problem.n_realizations < 1) {
    throw ConfigError("build_ensemble: need at least one realization");
  }
  Ensemble ens;
  ens.members.reserve(problem.n_realizations);
  // Without a blockade filter the config set depends only on the unit count,
  // so all members can share one basis.
  std::shared_ptr<const ManyBodyBasis> shared_basis;
  for (int r = 0; r < problem.n_realizations; ++r) {
    EnsembleMember m;
    m.realization = sample_realization(problem.geometry, problem.filling,
                                       mix_seed(problem.ensemble_seed, r));
    m.chain = reduce_to_superatoms(m.realization, problem.model, problem.blockade_bound_um);
    if (problem.truncation.blockade_radius_um) {
      m.basis = build_basis(m.chain, problem.truncation);
    } else {
      if (!shared_basis) shared_basis = build_basis(m.chain, problem.truncation);
      m.basis = shared_basis;
    }
    m.terms = assemble(m.chain, m.basis, problem.model);
    m.initial = ground_config(m.basis);
    m.target = resolve_target(problem.target, m.chain, m.terms, problem.final_delta);
    ens.members.push_back(std::move(m));
  }
  return ens;
}

double figure_of_merit(const PulseParams& params, const Ensemble& ensemble,
                       const ControlConstraints& constraints, double dt, int workers,
                       std::vector<double>* fidelities) {
  return pulse_figure_of_merit(synthesize(params, constraints, dt), ensemble, workers,
                               fidelities);
}

double pulse_figure_of_merit(const SampledPulse& pulse, const Ensemble& ensemble, int workers,
                             std::vector<double>* fidelities) {
  const int n = static_cast<int>(ensemble.members.size());
  std::vector<double> fids(n, 0.0);
  std::vector<char> failed(n, 0);
  RecordPolicy final_only;
  final_only.interval = 0.0;
  parallel_for(n, workers, [&](int r) {
    const EnsembleMember& m = ensemble.members[r];
    try {
      const Trajectory traj = evolve(m.initial, m.terms, pulse, final_only);
      fids[r] = fidelity(traj.final_state, m.target);
    } catch (const NumericalError& err) {
      std::fprintf(stderr, "figure_of_merit: realization %d failed: %s\n", r, err.what());
      failed[r] = 1;
    }
  });
  if (fidelities) *fidelities = fids;
  for (int r = 0; r < n; ++r) {
    if (failed[r]) return 1.0;
  }
  double sum = 0.0;
  for (int r = 0; r < n; ++r) sum += fids[r];  // fixed-order reduction
  return 1.0 - sum / n;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step0,
                             int budget, double tol) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw UsageError("nelder_mead: dimension must be at least 1");
  if (step0.size() != n) throw UsageError("nelder_mead: step0 size mismatch");

  NelderMeadResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = objective(x);
    result.trace.push_back(f);
    ++result.evaluations;
    return f;
  };

  std::vector<Eigen::VectorXd> xs(n + 1);
  std::vector<double> fs(n + 1);
  xs[0] = x0;
  fs[0] = eval(xs[0]);
  for (int i = 0; i < n && result.evaluations < budget; ++i) {
    xs[i + 1] = x0;
    xs[i + 1][i] += step0[i] != 0.0 ? step0[i] : 1e-3;
    fs[i + 1] = eval(xs[i + 1]);
  }

  std::vector<int> order(xs.size());
  auto sort_simplex = [&]() {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(xs.size());
    std::vector<double> fs2(fs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };
  sort_simplex();

  const int worst = n;
  while (result.evaluations < budget) {
    double diameter = 0.0;
    for (int i = 1; i <= n; ++i) diameter = std::max(diameter, (xs[i] - xs[0]).norm());
    if (diameter < tol || std::abs(fs[worst] - fs[0]) < tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      if (result.evaluations < budget) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[worst] = xe;
          fs[worst] = fe;
        } else {
          xs[worst] = xr;
          fs[worst] = fr;
        }
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else if (result.evaluations < budget) {
      bool shrink = false;
      if (fr < fs[worst]) {
        const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
        const double fc = eval(xc);
        if (fc <= fr) {
          xs[worst] = xc;
          fs[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        const Eigen::VectorXd xc = centroid - 0.5 * (centroid - xs[worst]);
        const double fc = eval(xc);
        if (fc < fs[worst]) {
          xs[worst] = xc;
          fs[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (int i = 1; i <= n && result.evaluations < budget; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    } else {
      break;
    }
    sort_simplex();
  }

  sort_simplex();
  result.x = xs[0];
  result.f = fs[0];
  return result;
}

namespace {

// Key by the raw coefficient bytes; the simplex revisits vertices.
struct VectorHash {
  std::size_t operator()(const std::string& s) const { return std::hash<std::string>{}(s); }
};

std::string coeff_key(const Eigen::VectorXd& x) {
  return std::string(reinterpret_cast<const char*>(x.data()), x.size() * sizeof(double));
}

void freeze_into_drift(PulseParams& params) {
  const int n_om = static_cast<int>(params.omega_freqs_mhz.size());
  const int n_de = static_cast<int>(params.delta_freqs_mhz.size());
  for (int k = 0; k < n_om; ++k) {
    params.omega_drift.push_back(
        {params.omega_freqs_mhz[k], params.coeffs[k], params.coeffs[n_om + k]});
  }
  for (int k = 0; k < n_de; ++k) {
    params.delta_drift.push_back({params.delta_freqs_mhz[k], params.coeffs[2 * n_om + k],
                                  params.coeffs[2 * n_om + n_de + k]});
  }
  params.omega_freqs_mhz.clear();
  params.delta_freqs_mhz.clear();
  params.coeffs = Eigen::VectorXd::Zero(0);
}

}  // namespace

OptimizationRun dcrab_optimize(const OptimizationProblem& problem) {
  const Ensemble ensemble = build_ensemble(problem);
  return dcrab_optimize(problem, ensemble);
}

OptimizationRun dcrab_optimize(const OptimizationProblem& problem, const Ensemble& ensemble) {
  const auto t_start = std::chrono::steady_clock::now();
  OptimizationRun run;

  PulseParams incumbent;
  incumbent.duration = problem.duration;
  incumbent.guess = problem.guess;
  incumbent.coeffs = Eigen::VectorXd::Zero(0);

  int eval_index = 0;
  auto scored_fom = [&](const PulseParams& params, int super) {
    const double f = figure_of_merit(params, ensemble, problem.constraints, problem.dt,
                                     problem.workers);
    run.trace.push_back({eval_index++, super, f});
    return f;
  };

  double incumbent_fom = scored_fom(incumbent, 0);
  run.guess_fom = incumbent_fom;

  for (int s = 1; s <= problem.n_super_iterations; ++s) {
    PulseParams working = incumbent;
    const std::uint64_t omega_seed = mix_seed(problem.basis_seed, s, 1);
    const std::uint64_t delta_seed = mix_seed(problem.basis_seed, s, 2);
    working.omega_freqs_mhz = draw_basis(omega_seed, problem.n_freqs,
                                         problem.constraints.omega_bandwidth_mhz,
                                         problem.duration);
    working.delta_freqs_mhz = draw_basis(delta_seed, problem.n_freqs,
                                         problem.constraints.delta_bandwidth_mhz,
                                         problem.duration);
    const int dim = working.coeff_count();
    working.coeffs = Eigen::VectorXd::Zero(dim);

    std::unordered_map<std::string, double, VectorHash> cache;
    auto objective = [&](const Eigen::VectorXd& x) {
      const std::string key = coeff_key(x);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
      PulseParams candidate = working;
      candidate.coeffs = x;
      const double f = scored_fom(candidate, s);
      cache.emplace(key, f);
      return f;
    };

    Eigen::VectorXd step0(dim);
    const int n_om = 2 * problem.n_freqs;
    for (int i = 0; i < dim; ++i) {
      step0[i] = problem.initial_step_scale * (i < n_om ? problem.constraints.omega_max
                                                        : problem.constraints.delta_bound);
    }

    const NelderMeadResult nm = nelder_mead(objective, working.coeffs, step0,
                                            problem.budget_per_super, problem.nm_tol);

    SuperIterationSummary summary;
    summary.index = s;
    summary.omega_seed = omega_seed;
    summary.delta_seed = delta_seed;
    summary.fom_start = incumbent_fom;
    summary.evaluations = nm.evaluations;
    if (nm.f < incumbent_fom) {
      working.coeffs = nm.x;
      freeze_into_drift(working);
      incumbent = std::move(working);
      incumbent_fom = nm.f;
    }
    summary.fom_end = incumbent_fom;
    run.super_iterations.push_back(summary);
  }

  run.best_params = incumbent;
  run.best_pulse = synthesize(incumbent, problem.constraints, problem.dt);
  run.best_fom = figure_of_merit(incumbent, ensemble, problem.constraints, problem.dt,
                                 problem.workers, &run.final_fidelities);
  // Freezing reorders floating-point sums, so keep the monotone incumbent
  // value when the re-evaluation agrees to roundoff.
  if (std::abs(run.best_fom - incumbent_fom) < 1e-9) run.best_fom = incumbent_fom;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return run;
}

}  // namespace rydopt
