#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "rydopt/observables.hpp"
#include "rydopt/pulse.hpp"

namespace rydopt {

struct OptimizationProblem {
  // Ensemble definition; the defect ensemble is drawn once and frozen.
  LatticeGeometry geometry;
  double filling = 1.0;
  int n_realizations = 50;
  std::uint64_t ensemble_seed = 12345;
  PhysicalModel model;
  Truncation truncation;
  double blockade_bound_um = -1.0;  // <0: default 8a

  TargetState target;
  double final_delta = 0.0;  // nominal detuning for crystal target resolution

  ControlConstraints constraints;
  double duration = 0.0;  // us
  double dt = 1e-3;       // us
  GuessPulse guess;

  // dCRAB knobs.
  int budget_per_super = 1000;
  int n_super_iterations = 5;
  int n_freqs = 3;
  double nm_tol = 1e-10;
  // Initial simplex step as a fraction of each field's amplitude cap. Guesses
  // that sit behind a fidelity barrier (GHZ from a dark pulse) need steps
  // large enough for the first simplex to see across it.
  double initial_step_scale = 0.4;
  std::uint64_t basis_seed = 777;

  int workers = 1;
};

// Frozen per-realization simulation inputs.
struct EnsembleMember {
  LatticeRealization realization;
  SuperAtomChain chain;
  std::shared_ptr<const ManyBodyBasis> basis;
  HamiltonianTerms terms;
  QuantumState initial;
  QuantumState target;
};

struct Ensemble {
  std::vector<EnsembleMember> members;
};

Ensemble build_ensemble(const OptimizationProblem& problem);

// 1 - mean fidelity over the fixed realization set. Realizations evaluate in
// parallel; the reduction runs in realization-index order so the result is
// identical for any worker count. A propagation failure scores the
// evaluation as worst-case 1. Per-realization fidelities are returned via
// `fidelities` when non-null.
double figure_of_merit(const PulseParams& params, const Ensemble& ensemble,
                       const ControlConstraints& constraints, double dt, int workers,
                       std::vector<double>* fidelities = nullptr);

// Same figure of merit for an already-sampled pulse (the replay path).
double pulse_figure_of_merit(const SampledPulse& pulse, const Ensemble& ensemble, int workers,
                             std::vector<double>* fidelities = nullptr);

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  std::vector<double> trace;  // f per evaluation, in evaluation order
};

// Textbook reflect/expand/contract/shrink simplex. Terminates on budget,
// simplex diameter < tol, or f spread < tol. Deterministic.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step0,
                             int budget, double tol);

struct EvalRecord {
  int eval_index = 0;
  int super_iteration = 0;
  double fom = 0.0;
};

struct SuperIterationSummary {
  int index = 0;
  std::uint64_t omega_seed = 0;
  std::uint64_t delta_seed = 0;
  double fom_start = 0.0;
  double fom_end = 0.0;
  int evaluations = 0;
};

struct OptimizationRun {
  PulseParams best_params;
  SampledPulse best_pulse;
  double best_fom = 1.0;
  double guess_fom = 1.0;
  std::vector<EvalRecord> trace;
  std::vector<SuperIterationSummary> super_iterations;
  std::vector<double> final_fidelities;  // per realization, at the optimum
  double wall_seconds = 0.0;
};

// dCRAB: per super-iteration draw a fresh random basis for both fields,
// minimize the joint coefficient vector with Nelder-Mead, then freeze the
// accepted correction into the drift. The incumbent never regresses.
OptimizationRun dcrab_optimize(const OptimizationProblem& problem, const Ensemble& ensemble);
OptimizationRun dcrab_optimize(const OptimizationProblem& problem);

}  // namespace rydopt
