#include "rydopt/runner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rydopt/errors.hpp"
#include "rydopt/parallel.hpp"
#include "rydopt/rng.hpp"

namespace rydopt {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string bitstring(std::uint32_t mask, int n_units) {
  std::string s(n_units, '0');
  for (int u = 0; u < n_units; ++u) {
    if (mask & (1u << u)) s[u] = '1';
  }
  return s;  // unit 0 first
}

fs::path prepare_outdir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config_hash"] = config_hash(cfg);
  m["config"] = canonical_json(cfg);
  write_json(dir / "manifest.json", m);
}

// Resolved physical context shared by the drivers: the optimization problem,
// plus the perfect-lattice member used for single-shot metrics.
struct RunContext {
  OptimizationProblem problem;
  EnsembleMember perfect;
  double delta_c = 0.0;  // critical detuning of the perfect lattice
};

EnsembleMember make_perfect_member(const OptimizationProblem& problem) {
  EnsembleMember m;
  m.realization = sample_realization(problem.geometry, 1.0, 0);
  m.chain = reduce_to_superatoms(m.realization, problem.model, problem.blockade_bound_um);
  m.basis = build_basis(m.chain, problem.truncation);
  m.terms = assemble(m.chain, m.basis, problem.model);
  m.initial = ground_config(m.basis);
  m.target = resolve_target(problem.target, m.chain, m.terms, problem.final_delta);
  return m;
}

RunContext make_context(const RunConfig& cfg) {
  RunContext ctx;
  OptimizationProblem& p = ctx.problem;
  p.geometry = build_geometry(cfg.geometry);
  p.filling = cfg.filling;
  p.n_realizations = cfg.optimizer.n_realizations;
  p.ensemble_seed = cfg.seed_ensemble;
  p.model = cfg.model;
  p.truncation = cfg.truncation;
  p.blockade_bound_um = cfg.blockade_bound_a * cfg.model.lattice_spacing;
  p.target = cfg.target.target;
  p.constraints = cfg.constraints;
  p.duration = cfg.pulse.duration;
  p.dt = cfg.pulse.dt;
  p.guess = cfg.pulse.guess;
  p.budget_per_super = cfg.optimizer.budget_per_super;
  p.n_super_iterations = cfg.optimizer.n_super_iterations;
  p.n_freqs = cfg.optimizer.n_freqs;
  p.nm_tol = cfg.optimizer.nm_tol;
  p.initial_step_scale = cfg.optimizer.initial_step_scale;
  p.basis_seed = cfg.seed_basis;
  p.workers = cfg.workers;

  // Critical detuning of the nominal (defect-free) lattice; used wherever a
  // config says "critical". It is a lab-side setting, so defects do not move it.
  const LatticeRealization perfect = sample_realization(p.geometry, 1.0, 0);
  const SuperAtomChain chain =
      reduce_to_superatoms(perfect, p.model, p.blockade_bound_um);
  ctx.delta_c = chain.n_units >= 2 ? critical_detuning(chain, p.model) : 0.0;
  if (cfg.pin_delta_end_critical) p.constraints.delta_end = ctx.delta_c;
  if (cfg.pin_delta_start_critical) p.constraints.delta_start = ctx.delta_c;
  if (cfg.pulse.flat_delta_critical) p.guess.delta_level = ctx.delta_c;

  if (cfg.target.final_delta) {
    p.final_delta = *cfg.target.final_delta;
  } else {
    switch (p.guess.kind) {
      case GuessPulse::Kind::Chirp:
        p.final_delta = p.guess.delta_end;
        break;
      case GuessPulse::Kind::FlatDelta:
        p.final_delta = p.guess.delta_level;
        break;
      case GuessPulse::Kind::Zero:
        p.final_delta = p.constraints.delta_end.value_or(0.0);
        break;
    }
  }

  ctx.perfect = make_perfect_member(p);
  return ctx;
}

void write_trace_jsonl(const fs::path& path, const OptimizationRun& run) {
  std::ofstream out(path);
  for (const auto& rec : run.trace) {
    out << "{\"eval\":" << rec.eval_index << ",\"super\":" << rec.super_iteration
        << ",\"fom\":" << fmt17(rec.fom) << "}\n";
  }
}

void write_fidelities_csv(const fs::path& path, const std::vector<double>& fids) {
  std::string csv = "realization,fidelity\n";
  for (std::size_t r = 0; r < fids.size(); ++r) {
    csv += std::to_string(r) + "," + fmt17(fids[r]) + "\n";
  }
  write_file(path, csv);
}

struct EnsembleReport {
  std::vector<Trajectory> trajectories;  // no states, per member
  Eigen::VectorXd mean_pn;
  Eigen::VectorXd mean_ne_density;
  double mean_final_ne = 0.0;
  double mean_pd_tau = 0.0;
  double fidelity_spread = 0.0;
};

EnsembleReport replay_ensemble(const Ensemble& ensemble, const SampledPulse& pulse,
                               const RunConfig& cfg) {
  const int n = static_cast<int>(ensemble.members.size());
  EnsembleReport rep;
  rep.trajectories.resize(n);
  RecordPolicy policy;
  policy.interval = cfg.record_interval;
  parallel_for(n, cfg.workers, [&](int r) {
    rep.trajectories[r] = evolve(ensemble.members[r].initial, ensemble.members[r].terms,
                                 pulse, policy);
  });
  const int n_units = ensemble.members[0].chain.n_units;
  rep.mean_pn = Eigen::VectorXd::Zero(n_units + 1);
  rep.mean_ne_density = Eigen::VectorXd::Zero(n_units);
  for (int r = 0; r < n; ++r) {
    const QuantumState& final_state = rep.trajectories[r].final_state;
    rep.mean_pn += excitation_distribution(final_state);
    rep.mean_ne_density += excitation_density(final_state);
    rep.mean_final_ne += rep.trajectories[r].excitation_number.back();
    rep.mean_pd_tau +=
        decay_probability(rep.trajectories[r], cfg.model.gamma_decay).back();
  }
  rep.mean_pn /= n;
  rep.mean_ne_density /= n;
  rep.mean_final_ne /= n;
  rep.mean_pd_tau /= n;
  return rep;
}

// Per-record dynamics report of the defect-free lattice: adiabaticity
// diagnostics, instantaneous fidelity and sector populations.
void write_perfect_diagnostics(const fs::path& dir, const EnsembleMember& perfect,
                               const SampledPulse& pulse, const RunConfig& cfg,
                               json& summary) {
  RecordPolicy policy;
  policy.interval = cfg.record_interval;
  policy.store_states = true;
  const Trajectory traj = evolve(perfect.initial, perfect.terms, pulse, policy);
  const auto pd = decay_probability(traj, cfg.model.gamma_decay);
  const auto trace = adiabaticity_trace(traj, perfect.terms, pulse, 2);

  const int n_units = perfect.chain.n_units;
  std::string csv =
      "t_us,energy_rad_us,ground_energy_rad_us,gap_rad_us,ground_overlap,fidelity,"
      "total_ne,pd";
  const int pn_cols = std::min(n_units, 6);
  for (int k = 0; k <= pn_cols; ++k) csv += ",p" + std::to_string(k);
  csv += "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    QuantumState state{perfect.basis, traj.states[i]};
    const double fid = fidelity(state, perfect.target);
    const Eigen::VectorXd pn = excitation_distribution(state);
    csv += fmt17(traj.times[i]) + "," + fmt17(trace[i].energy) + "," +
           fmt17(trace[i].ground_energy) + "," + fmt17(trace[i].gap) + "," +
           fmt17(trace[i].ground_overlap) + "," + fmt17(fid) + "," +
           fmt17(traj.excitation_number[i]) + "," + fmt17(pd[i]);
    for (int k = 0; k <= pn_cols; ++k) csv += "," + fmt17(pn[k]);
    csv += "\n";
  }
  write_file(dir / "diagnostics.csv", csv);

  summary["single_shot_fidelity"] = fidelity(traj.final_state, perfect.target);
  summary["single_shot_pd_tau"] = pd.back();
  summary["single_shot_final_ne"] = traj.excitation_number.back();
}

void write_pn_csv(const fs::path& dir, const Eigen::VectorXd& target_pn,
                  const Eigen::VectorXd& mean_pn) {
  std::string csv = "n,p_target,p_final\n";
  for (int n = 0; n < mean_pn.size(); ++n) {
    csv += std::to_string(n) + "," + fmt17(target_pn[n]) + "," + fmt17(mean_pn[n]) + "\n";
  }
  write_file(dir / "pn.csv", csv);
}

void write_ne_csv(const fs::path& dir, const Eigen::VectorXd& target_ne,
                  const Eigen::VectorXd& mean_ne) {
  std::string csv = "unit,ne_target,ne_final\n";
  for (int u = 0; u < mean_ne.size(); ++u) {
    csv += std::to_string(u) + "," + fmt17(target_ne[u]) + "," + fmt17(mean_ne[u]) + "\n";
  }
  write_file(dir / "ne.csv", csv);
}

void write_pd_csv(const fs::path& dir, const Trajectory& traj, double gamma) {
  const auto pd = decay_probability(traj, gamma);
  std::string csv = "t_us,total_ne,pd\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    csv += fmt17(traj.times[i]) + "," + fmt17(traj.excitation_number[i]) + "," +
           fmt17(pd[i]) + "\n";
  }
  write_file(dir / "pd.csv", csv);
}

// Dense rho tables for the small corner-lattice states (Fig-style output).
void write_rho_csv(const fs::path& path, const Eigen::MatrixXcd& rho,
                   const ManyBodyBasis& basis) {
  std::string csv = "row_config,col_config,re,im\n";
  for (int r = 0; r < rho.rows(); ++r) {
    for (int c = 0; c < rho.cols(); ++c) {
      csv += bitstring(basis.configs[r], basis.n_units) + "," +
             bitstring(basis.configs[c], basis.n_units) + "," + fmt17(rho(r, c).real()) +
             "," + fmt17(rho(r, c).imag()) + "\n";
    }
  }
  write_file(path, csv);
}

Eigen::MatrixXcd average_density_matrix(const Ensemble& ensemble,
                                        const std::vector<Trajectory>& trajectories) {
  const auto& basis0 = *ensemble.members[0].basis;
  for (const auto& m : ensemble.members) {
    if (!m.basis->same_space(basis0)) {
      throw ConfigError("density-matrix reports need a realization-independent basis; "
                        "use truncation 'none' or 'max_excitations'");
    }
  }
  const int dim = basis0.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& traj : trajectories) {
    rho += traj.final_state.amplitudes * traj.final_state.amplitudes.adjoint();
  }
  return rho / static_cast<double>(trajectories.size());
}

json optimization_summary(const OptimizationRun& run, const RunConfig& cfg,
                          const RunContext& ctx) {
  json s;
  s["fom"] = run.best_fom;
  s["ensemble_fidelity"] = 1.0 - run.best_fom;
  s["guess_fom"] = run.guess_fom;
  s["evaluations"] = run.trace.size();
  s["wall_seconds"] = run.wall_seconds;
  s["duration_us"] = cfg.pulse.duration;
  s["delta_c_mhz"] = rad_us_to_mhz(ctx.delta_c);
  json supers = json::array();
  for (const auto& sup : run.super_iterations) {
    supers.push_back({{"index", sup.index},
                      {"fom_start", sup.fom_start},
                      {"fom_end", sup.fom_end},
                      {"evaluations", sup.evaluations}});
  }
  s["super_iterations"] = supers;
  double fmin = 1.0, fmax = 0.0;
  for (double f : run.final_fidelities) {
    fmin = std::min(fmin, f);
    fmax = std::max(fmax, f);
  }
  s["fidelity_min"] = fmin;
  s["fidelity_max"] = fmax;
  s["fidelity_spread"] = fmax - fmin;
  s["omega_rise_time_us"] = rise_time(run.best_pulse.omega, run.best_pulse.dt);
  return s;
}

// The schema of the summary table: ensemble fidelity, single-shot fidelity,
// their gap, decay bound, mean excitation number, duration.
json summary_table(double f, double fs, double pd_tau, double ne_mean, double tau) {
  return json{{"F", f},          {"F_s", fs},           {"Fs_minus_F", fs - f},
              {"P_d_tau", pd_tau}, {"N_e_mean", ne_mean}, {"tau_us", tau}};
}

json finish_optimization_command(const RunConfig& cfg, const RunContext& ctx,
                                 const Ensemble& ensemble, const OptimizationRun& run,
                                 const fs::path& dir, EnsembleReport& rep) {
  write_pulse_csv(run.best_pulse, (dir / "pulse.csv").string());
  write_trace_jsonl(dir / "trace.jsonl", run);
  write_fidelities_csv(dir / "fidelities.csv", run.final_fidelities);

  json summary = optimization_summary(run, cfg, ctx);
  write_perfect_diagnostics(dir, ctx.perfect, run.best_pulse, cfg, summary);

  rep = replay_ensemble(ensemble, run.best_pulse, cfg);
  write_pn_csv(dir, excitation_distribution(ctx.perfect.target), rep.mean_pn);
  write_ne_csv(dir, excitation_density(ctx.perfect.target), rep.mean_ne_density);
  write_pd_csv(dir, rep.trajectories[0], cfg.model.gamma_decay);

  summary["mean_pd_tau"] = rep.mean_pd_tau;
  summary["mean_final_ne"] = rep.mean_final_ne;
  summary["table"] = summary_table(1.0 - run.best_fom,
                                   summary["single_shot_fidelity"].get<double>(),
                                   rep.mean_pd_tau, rep.mean_final_ne, cfg.pulse.duration);
  return summary;
}

}  // namespace

json run_spectrum(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "spectrum");

  const LatticeGeometry geometry = build_geometry(cfg.geometry);
  const LatticeRealization perfect = sample_realization(geometry, 1.0, 0);
  const SuperAtomChain chain =
      reduce_to_superatoms(perfect, cfg.model, cfg.blockade_bound_a * cfg.model.lattice_spacing);
  const auto basis = build_basis(chain, cfg.truncation);
  const HamiltonianTerms terms = assemble(chain, basis, cfg.model);
  const double vl = end_to_end_interaction(chain, cfg.model);

  std::string csv = "delta_mhz,delta_over_vl,energy_mhz,energy_over_vl,n_excited,config\n";
  const int n_points = cfg.spectrum.n_points;
  for (int p = 0; p < n_points; ++p) {
    const double delta =
        n_points == 1 ? cfg.spectrum.delta_min
                      : cfg.spectrum.delta_min + (cfg.spectrum.delta_max - cfg.spectrum.delta_min) *
                                                     p / (n_points - 1);
    auto entries = classical_spectrum(terms, delta);
    const int keep = cfg.spectrum.max_levels > 0
                         ? std::min<int>(cfg.spectrum.max_levels, entries.size())
                         : static_cast<int>(entries.size());
    for (int i = 0; i < keep; ++i) {
      csv += fmt17(rad_us_to_mhz(delta)) + "," + fmt17(delta / vl) + "," +
             fmt17(rad_us_to_mhz(entries[i].energy)) + "," + fmt17(entries[i].energy / vl) +
             "," + std::to_string(entries[i].n_excited) + "," +
             bitstring(entries[i].config, chain.n_units) + "\n";
    }
  }
  write_file(dir / "spectrum.csv", csv);

  json summary;
  summary["n_units"] = chain.n_units;
  summary["v_l_mhz"] = rad_us_to_mhz(vl);
  if (chain.n_units >= 2) {
    const double dc = critical_detuning(chain, cfg.model);
    summary["delta_c_mhz"] = rad_us_to_mhz(dc);
    summary["delta_c_over_vl"] = dc / vl;
  }
  write_json(dir / "summary.json", summary);
  return summary;
}

json run_crystal(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "crystal");
  RunContext ctx = make_context(cfg);
  const Ensemble ensemble = build_ensemble(ctx.problem);
  const OptimizationRun run = dcrab_optimize(ctx.problem, ensemble);
  EnsembleReport rep;
  json summary = finish_optimization_command(cfg, ctx, ensemble, run, dir, rep);
  if (cfg.target.target.crystal_excitations >= 0) {
    summary["target_excitations"] = cfg.target.target.crystal_excitations;
    const Eigen::VectorXd pn = excitation_distribution(ctx.perfect.target);
    Eigen::Index actual = 0;
    pn.maxCoeff(&actual);
    if (actual != cfg.target.target.crystal_excitations) {
      summary["target_warning"] = "classical ground state at the final detuning has " +
                                  std::to_string(actual) + " excitations, not " +
                                  std::to_string(cfg.target.target.crystal_excitations);
    }
  }
  write_json(dir / "summary.json", summary);
  return summary;
}

json run_staircase(const RunConfig& cfg, const std::string& pulse_csv) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "staircase");
  if (cfg.geometry.shape != LatticeShape::Bar) {
    throw ConfigError("staircase: needs a bar geometry");
  }
  const SampledPulse pulse = read_pulse_csv(pulse_csv);
  const double delta_final = pulse.delta.back();

  std::string csv = "n_units,ne_classical,ne_prepared\n";
  json rows = json::array();
  for (int n = cfg.staircase.n_min; n <= cfg.staircase.n_max; ++n) {
    const LatticeGeometry geometry = build_bar(cfg.geometry.rows, n);
    const LatticeRealization perfect = sample_realization(geometry, 1.0, 0);
    const SuperAtomChain chain = reduce_to_superatoms(
        perfect, cfg.model, cfg.blockade_bound_a * cfg.model.lattice_spacing);
    const auto basis = build_basis(chain, cfg.truncation);
    const HamiltonianTerms terms = assemble(chain, basis, cfg.model);

    int best = 0;
    double best_e = 0.0;
    for (int i = 0; i < terms.dim(); ++i) {
      const double e = terms.diag_interaction[i] - delta_final * terms.excitation_count[i];
      if (i == 0 || e < best_e) {
        best_e = e;
        best = i;
      }
    }
    const int ne_classical = terms.excitation_count[best];

    RecordPolicy final_only;
    final_only.interval = 0.0;
    const Trajectory traj = evolve(ground_config(basis), terms, pulse, final_only);
    const double ne_prepared = traj.excitation_number.back();

    csv += std::to_string(n) + "," + std::to_string(ne_classical) + "," +
           fmt17(ne_prepared) + "\n";
    rows.push_back({{"n_units", n}, {"ne_classical", ne_classical},
                    {"ne_prepared", ne_prepared}});
  }
  write_file(dir / "staircase.csv", csv);
  json summary;
  summary["delta_final_mhz"] = rad_us_to_mhz(delta_final);
  summary["rows"] = rows;
  write_json(dir / "summary.json", summary);
  return summary;
}

json run_ghz(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "ghz");
  if (cfg.geometry.shape != LatticeShape::CornerSquare) {
    throw ConfigError("ghz: needs the corner_square geometry");
  }
  RunContext ctx = make_context(cfg);
  const Ensemble ensemble = build_ensemble(ctx.problem);
  const OptimizationRun run = dcrab_optimize(ctx.problem, ensemble);
  EnsembleReport rep;
  json summary = finish_optimization_command(cfg, ctx, ensemble, run, dir, rep);

  // Detection step 1: excitation measurement over the prepared ensemble.
  const int n_members = static_cast<int>(ensemble.members.size());
  std::map<std::uint32_t, int> histogram;
  for (int r = 0; r < n_members; ++r) {
    const int shots = cfg.detection.n_shots / n_members +
                      (r < cfg.detection.n_shots % n_members ? 1 : 0);
    if (shots == 0) continue;
    for (const auto& [mask, count] :
         measure_configs(rep.trajectories[r].final_state, shots, mix_seed(cfg.seed_measure, r))) {
      histogram[mask] += count;
    }
  }
  json hist_json;
  for (const auto& [mask, count] : histogram) {
    hist_json[bitstring(mask, ensemble.members[0].chain.n_units)] = count;
  }
  write_json(dir / "histogram.json", hist_json);

  // Step 2: subspace reconstruction and free-evolution discrimination.
  std::vector<std::pair<double, QuantumState>> finals;
  for (const auto& traj : rep.trajectories) finals.emplace_back(1.0, traj.final_state);
  const std::uint32_t e_mask = ctx.perfect.chain.active_mask();
  const SubspaceExtraction sub = extract_subspace(finals, 0, e_mask);
  json sub_json{{"gamma", sub.sub.gamma},
                {"alpha", sub.sub.alpha},
                {"alpha_over_pi", sub.sub.alpha / kPi},
                {"leakage", sub.leakage},
                {"subspace_trace", sub.subspace_trace}};
  write_json(dir / "subspace.json", sub_json);
  summary["subspace"] = sub_json;

  const double omega_m = cfg.detection.omega_m.value_or(cfg.constraints.omega_max);
  const double theta = cfg.target.target.ghz_theta;
  const DetectionResult det =
      detection_evolution(sub.sub, ctx.perfect.terms, omega_m, theta, cfg.detection.t_max,
                          cfg.detection.dt, cfg.detection.unit_index);
  std::string det_csv = "t_us,e_candidate,e_reference,d_t\n";
  for (std::size_t i = 0; i < det.times.size(); ++i) {
    det_csv += fmt17(det.times[i]) + "," + fmt17(det.excitation_candidate[i]) + "," +
               fmt17(det.excitation_reference[i]) + "," + fmt17(det.deviation[i]) + "\n";
  }
  write_file(dir / "detection.csv", det_csv);
  summary["detection_max_abs_deviation"] = det.max_abs_deviation;
  summary["detection_argmax_us"] = det.argmax_time;

  const DeviationMap map =
      deviation_map(ctx.perfect.terms, omega_m, theta, cfg.detection.grid_gamma,
                    cfg.detection.grid_alpha, cfg.detection.t_max, cfg.detection.dt,
                    cfg.detection.unit_index);
  std::string map_csv = "gamma,alpha,abs_deviation,argmax_us\n";
  for (std::size_t i = 0; i < map.gammas.size(); ++i) {
    for (std::size_t j = 0; j < map.alphas.size(); ++j) {
      map_csv += fmt17(map.gammas[i]) + "," + fmt17(map.alphas[j]) + "," +
                 fmt17(map.max_abs_deviation(i, j)) + "," + fmt17(map.argmax_time(i, j)) +
                 "\n";
    }
  }
  write_file(dir / "deviation_map.csv", map_csv);

  const Eigen::MatrixXcd rho = average_density_matrix(ensemble, rep.trajectories);
  write_rho_csv(dir / "rho_final.csv", rho, *ensemble.members[0].basis);
  const Eigen::MatrixXcd rho_target = ctx.perfect.target.amplitudes *
                                      ctx.perfect.target.amplitudes.adjoint();
  write_rho_csv(dir / "rho_target.csv", rho_target, *ctx.perfect.basis);

  write_json(dir / "summary.json", summary);
  return summary;
}

json run_arbitrary(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "arbitrary");
  RunContext ctx = make_context(cfg);
  const Ensemble ensemble = build_ensemble(ctx.problem);
  const OptimizationRun run = dcrab_optimize(ctx.problem, ensemble);
  EnsembleReport rep;
  json summary = finish_optimization_command(cfg, ctx, ensemble, run, dir, rep);

  double coeff_norm = 0.0;
  for (double a : cfg.target.target.symmetric_coeffs) coeff_norm += a * a;
  if (std::abs(coeff_norm - 1.0) > 1e-9) {
    std::fprintf(stderr, "arbitrary: target coefficients renormalized (sum sq = %g)\n",
                 coeff_norm);
    summary["coefficient_warning"] = "coefficients were renormalized";
  }
  const Eigen::MatrixXcd rho = average_density_matrix(ensemble, rep.trajectories);
  const Eigen::MatrixXcd target_proj =
      ctx.perfect.target.amplitudes * ctx.perfect.target.amplitudes.adjoint();
  write_rho_csv(dir / "rho_final.csv", rho, *ensemble.members[0].basis);
  write_rho_csv(dir / "rho_diff.csv", rho - target_proj, *ensemble.members[0].basis);
  summary["rho_diff_max_abs"] = (rho - target_proj).cwiseAbs().maxCoeff();

  write_json(dir / "summary.json", summary);
  return summary;
}

json run_simulate(const RunConfig& cfg, const std::string& pulse_csv) {
  const fs::path dir = prepare_outdir(cfg);
  write_manifest(dir, cfg, "simulate");
  RunContext ctx = make_context(cfg);
  const SampledPulse pulse = read_pulse_csv(pulse_csv);

  const Ensemble ensemble = build_ensemble(ctx.problem);
  std::vector<double> fids;
  const double fom = pulse_figure_of_merit(pulse, ensemble, cfg.workers, &fids);
  write_fidelities_csv(dir / "fidelities.csv", fids);

  json summary;
  summary["fom"] = fom;
  summary["ensemble_fidelity"] = 1.0 - fom;
  summary["delta_c_mhz"] = rad_us_to_mhz(ctx.delta_c);
  write_perfect_diagnostics(dir, ctx.perfect, pulse, cfg, summary);

  const EnsembleReport rep = replay_ensemble(ensemble, pulse, cfg);
  write_pn_csv(dir, excitation_distribution(ctx.perfect.target), rep.mean_pn);
  write_ne_csv(dir, excitation_density(ctx.perfect.target), rep.mean_ne_density);
  write_pd_csv(dir, rep.trajectories[0], cfg.model.gamma_decay);
  summary["mean_pd_tau"] = rep.mean_pd_tau;
  summary["mean_final_ne"] = rep.mean_final_ne;
  summary["table"] =
      summary_table(1.0 - fom, summary["single_shot_fidelity"].get<double>(),
                    rep.mean_pd_tau, rep.mean_final_ne, pulse.duration());

  write_json(dir / "summary.json", summary);
  return summary;
}

json run_command(const RunConfig& cfg, const std::string& command,
                 const std::string& pulse_csv) {
  if (command == "spectrum") return run_spectrum(cfg);
  if (command == "crystal") return run_crystal(cfg);
  if (command == "ghz") return run_ghz(cfg);
  if (command == "arbitrary") return run_arbitrary(cfg);
  if (command == "staircase") {
    if (pulse_csv.empty()) throw UsageError("staircase: needs a pulse CSV");
    return run_staircase(cfg, pulse_csv);
  }
  if (command == "simulate") {
    if (pulse_csv.empty()) throw UsageError("simulate: needs a pulse CSV");
    return run_simulate(cfg, pulse_csv);
  }
  throw UsageError("unknown command '" + command + "'");
}

}  // namespace rydopt
