// Command-line driver for the cavity quantum-reservoir-computing harness.
//
//   qrc run        one experiment (quantum or ESN reservoir)
//   qrc sweep      one-axis parameter sweep
//   qrc reproduce  named presets generating the benchmark figure data
//
// Every flag can also be supplied through a plain-text config file
// (--config FILE with "key=value" lines).

#include <array>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrc/experiment.hpp"
#include "qrc/stochastic.hpp"

namespace {

using namespace qrc;

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

struct CliOptions {
  ExperimentConfig config;
  std::string task = "mackey_glass";
  std::string reservoir = "quantum";
  std::string regression = "linear";
  std::string ladder = "omega";
  std::string omega_list, g_list;
  int sme_trajectories = 0;
  bool sme_dump = false;
  double sme_dt = 1e-3;
};

/// Expands "--config FILE" into option tokens placed directly after the
/// subcommand, so config values act as defaults and command-line flags
/// override them. The file holds one "key=value" pair per line; keys match
/// the long option names without the leading dashes; '#' starts a comment.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  std::vector<std::string> out;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (config_path.empty()) return out;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file " + config_path);
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      auto last = s.find_last_not_of(" \t\r");
      s.erase(last == std::string::npos ? 0 : last + 1);
      return s;
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    extra.push_back("--" + key);
    if (!value.empty()) extra.push_back(value);
  }
  // insert after the subcommand token (the first non-flag argument)
  size_t insert_at = out.size();
  for (size_t i = 1; i < out.size(); ++i) {
    if (!out[i].empty() && out[i][0] != '-') {
      insert_at = i + 1;
      break;
    }
  }
  out.insert(out.begin() + insert_at, extra.begin(), extra.end());
  return out;
}

void add_common_options(CLI::App* cmd, CliOptions& opt) {
  ExperimentConfig& c = opt.config;
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--task", opt.task, "mackey_glass | sine_square")
      ->check(CLI::IsMember({"mackey_glass", "sine_square"}));
  cmd->add_option("--reservoir", opt.reservoir, "quantum | esn")
      ->check(CLI::IsMember({"quantum", "esn"}));
  cmd->add_option("--regression", opt.regression, "linear | polynomial")
      ->check(CLI::IsMember({"linear", "polynomial"}));
  cmd->add_option("--atoms", c.n_atom, "atom count");
  cmd->add_option("--omega-list", opt.omega_list,
                  "comma list of atomic detunings (default: ladder values)");
  cmd->add_option("--g-list", opt.g_list,
                  "comma list of couplings (default: ladder values)");
  cmd->add_option("--ladder", opt.ladder,
                  "parameter family when lists are omitted: omega | g")
      ->check(CLI::IsMember({"omega", "g"}));
  cmd->add_option("--kappa", c.kappa, "total decay budget");
  cmd->add_option("--omega-c", c.omega_c, "cavity detuning");
  cmd->add_option("--epsilon", c.epsilon, "drive strength");
  cmd->add_option("--delay", c.delay, "Mackey-Glass prediction horizon");
  cmd->add_option("--n-ss", c.n_ss, "samples per sine-square waveform");
  cmd->add_option("--omega-ss", c.omega_ss, "sine-square angular frequency");
  cmd->add_option("--hidden-atoms", c.hidden_atoms,
                  "atoms excluded from the measured readout set");
  cmd->add_option("--fock", c.n_fock, "photon truncation");
  cmd->add_option("--substep", c.substep,
                  "inner RK4 step (<=0: stability-derived)");
  cmd->add_option("--tail-threshold", c.fock_tail_threshold,
                  "maximum allowed top-Fock population");
  cmd->add_option("--fading", c.mg_zones.fading, "MG fading steps");
  cmd->add_option("--train", c.mg_zones.training, "MG training steps");
  cmd->add_option("--test", c.mg_zones.testing, "MG testing steps");
  cmd->add_option("--ss-fading", c.ss_fading_waveforms, "SS fading waveforms");
  cmd->add_option("--ss-train", c.ss_training_waveforms,
                  "SS training waveforms");
  cmd->add_option("--ss-test", c.ss_testing_waveforms, "SS testing waveforms");
  cmd->add_option("--esn-neurons", c.esn_neurons,
                  "ESN state length (0: match 2N+2)");
  cmd->add_option("--esn-ensemble", c.esn_ensemble, "ESN ensemble size");
  cmd->add_option("--esn-cap", c.esn_spectral_cap,
                  "largest singular value of the ESN matrix");
  cmd->add_option("--delta", c.ridge_delta, "ridge regression parameter");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--workers", c.workers, "worker threads (0: hardware)");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
  cmd->add_option("--label", c.label, "output file prefix");
}

void finalize_options(CliOptions& opt) {
  ExperimentConfig& c = opt.config;
  c.task = opt.task == "mackey_glass" ? TaskKind::mackey_glass
                                      : TaskKind::sine_square;
  c.reservoir =
      opt.reservoir == "quantum" ? ReservoirKind::quantum : ReservoirKind::esn;
  c.regression = opt.regression == "linear" ? RegressionMode::linear
                                            : RegressionMode::polynomial;
  c.ladder = opt.ladder == "omega" ? AtomLadder::omega : AtomLadder::g;
  if (!opt.omega_list.empty()) c.omega = parse_list(opt.omega_list);
  if (!opt.g_list.empty()) c.g = parse_list(opt.g_list);
}

WorkerPool& shared_pool(int workers) {
  static WorkerPool pool(workers > 0 ? workers : 0);
  return pool;
}

void run_sme_validation(const CliOptions& opt) {
  ExperimentConfig config = opt.config;
  config.resolve();
  TaskSeries series = config.build_series();
  HilbertSpace space = build_space(config.n_fock, config.n_atom);
  ReservoirParams params = config.reservoir_params();
  SmeRunConfig sme;
  sme.dt = opt.sme_dt;
  sme.dt_sample = series.dt_sample;

  std::printf("running %d stochastic trajectories (dt = %g)...\n",
              opt.sme_trajectories, sme.dt);
  WorkerPool& pool = shared_pool(config.workers);
  SmeEnsembleResult ens =
      ensemble_average(space, params, series.f, sme, opt.sme_trajectories,
                       config.seed ^ 0x9d2c5680ull, &pool);
  ensure_dir(config.out_dir);
  std::ofstream out(config.out_dir + "/" + config.label + "_sme_mean.tsv");
  out.precision(17);
  auto names = OperatorSet::observable_names(config.n_atom);
  out << "k";
  for (const auto& n : names) out << '\t' << n << "\tstderr_" << n;
  out << '\n';
  for (long k = 0; k < ens.mean.rows(); ++k) {
    out << k;
    for (long c = 0; c < ens.mean.cols(); ++c) {
      out << '\t' << ens.mean(k, c) << '\t' << ens.stderr_(k, c);
    }
    out << '\n';
  }
  if (opt.sme_dump) {
    detail::SmeContext ctx(space, params);
    SmeRunConfig with_records = sme;
    with_records.keep_records = true;
    for (int t = 0; t < opt.sme_trajectories; ++t) {
      SmeTrajectoryResult traj = run_trajectory(
          ctx, series.f, with_records, config.seed ^ 0x9d2c5680ull,
          static_cast<std::uint64_t>(t));
      write_trajectory_records(config.out_dir + "/" + config.label +
                                   "_trajectory_" + std::to_string(t) + ".tsv",
                               traj.records, sme.dt, names);
    }
  }
}

int cmd_run(CliOptions& opt) {
  finalize_options(opt);
  ExperimentConfig& config = opt.config;
  std::vector<ExperimentResult> results;
  if (config.reservoir == ReservoirKind::quantum) {
    results.push_back(run_quantum_experiment(config));
  } else {
    results.push_back(run_esn_experiment(config, &shared_pool(config.workers)));
  }
  emit_report(results, config.out_dir);
  for (const auto& r : results) {
    std::printf("%-28s train NRMSE %.6f   test NRMSE %.6f\n", r.label.c_str(),
                r.train_nrmse, r.test_nrmse);
  }
  if (opt.sme_trajectories > 0) run_sme_validation(opt);
  std::printf("report written to %s\n", config.out_dir.c_str());
  return 0;
}

int cmd_sweep(CliOptions& opt, const std::string& axis_name,
              const std::string& values_csv) {
  finalize_options(opt);
  SweepAxis axis = sweep_axis_from_string(axis_name);
  std::vector<double> values = parse_list(values_csv);
  if (values.empty()) {
    std::fprintf(stderr, "sweep: --values must list at least one point\n");
    return 2;
  }
  WorkerPool& pool = shared_pool(opt.config.workers);
  SweepResult result = sweep(opt.config, axis, values, &pool);
  ensure_dir(opt.config.out_dir);
  std::string table = opt.config.out_dir + "/sweep_" + to_string(axis) + ".tsv";
  write_sweep_table(result, table);
  if (!result.results.empty()) {
    emit_report(result.results, opt.config.out_dir);
  }
  int failures = 0;
  for (const auto& row : result.rows) {
    if (row.error.empty()) {
      std::printf("%s = %-10g train %.6f  test %.6f\n", to_string(axis),
                  row.value, row.train_nrmse, row.test_nrmse);
    } else {
      ++failures;
      std::printf("%s = %-10g FAILED: %s\n", to_string(axis), row.value,
                  row.error.c_str());
    }
  }
  std::printf("sweep table written to %s\n", table.c_str());
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Figure-data presets

struct PresetIo {
  std::string out_dir;

  void write_qrc_table(const std::string& name,
                       const std::vector<std::array<double, 6>>& rows,
                       const std::string& axis) const {
    std::ofstream out(out_dir + "/" + name);
    out.precision(10);
    out << axis
        << "\tneurons\ttrain_linear\ttest_linear\ttrain_poly\ttest_poly\n";
    for (const auto& r : rows) {
      out << r[0] << '\t' << r[1] << '\t' << r[2] << '\t' << r[3] << '\t'
          << r[4] << '\t' << r[5] << '\n';
    }
  }
};

int preset_atom_scaling(ExperimentConfig base, const std::string& tag,
                        WorkerPool& pool) {
  ensure_dir(base.out_dir);
  PresetIo io{base.out_dir};
  std::vector<ExperimentResult> all;
  for (AtomLadder ladder : {AtomLadder::omega, AtomLadder::g}) {
    std::vector<std::array<double, 6>> rows;
    for (int atoms = 1; atoms <= 5; ++atoms) {
      ExperimentConfig cfg = base;
      cfg.ladder = ladder;
      cfg.n_atom = atoms;
      cfg.omega.clear();
      cfg.g.clear();
      cfg.label = tag + "_" + to_string(ladder) + "_atoms" +
                  std::to_string(atoms);
      auto [lin, poly] = run_quantum_experiment_both(cfg);
      rows.push_back({double(atoms), double(2 * atoms + 2), lin.train_nrmse,
                      lin.test_nrmse, poly.train_nrmse, poly.test_nrmse});
      std::printf("%s atoms=%d  linear %.4f  poly %.4f\n",
                  to_string(ladder), atoms, lin.test_nrmse, poly.test_nrmse);
      all.push_back(std::move(lin));
      all.push_back(std::move(poly));
    }
    io.write_qrc_table(tag + "_" + to_string(ladder) + "_ladder.tsv", rows,
                       "atoms");
  }
  // classical baseline at matched neuron counts
  std::ofstream esn_out(base.out_dir + "/" + tag + "_esn.tsv");
  esn_out.precision(10);
  esn_out << "neurons\tmean_test_nrmse\tstderr\tmean_train_nrmse\n";
  for (int neurons : {4, 6, 8, 10, 12}) {
    ExperimentConfig cfg = base;
    cfg.reservoir = ReservoirKind::esn;
    cfg.esn_neurons = neurons;
    cfg.label = tag + "_esn_" + std::to_string(neurons);
    ExperimentResult r = run_esn_experiment(cfg, &pool);
    esn_out << neurons << '\t' << r.test_nrmse << '\t'
            << r.metadata["esn"]["stderr_test_nrmse"].get<double>() << '\t'
            << r.train_nrmse << '\n';
    std::printf("esn neurons=%d  mean test %.4f\n", neurons, r.test_nrmse);
    all.push_back(std::move(r));
  }
  emit_report(all, base.out_dir);
  return 0;
}

int preset_hidden_atoms(ExperimentConfig base, WorkerPool&) {
  ensure_dir(base.out_dir);
  PresetIo io{base.out_dir};
  std::vector<ExperimentResult> all;
  std::vector<std::array<double, 6>> rows;
  for (int hidden = 0; hidden <= 4; ++hidden) {
    ExperimentConfig cfg = base;
    hidden_atom_params(hidden, cfg.omega, cfg.g);
    cfg.n_atom = 1 + hidden;
    cfg.hidden_atoms = hidden;
    cfg.label = "fig3b_hidden" + std::to_string(hidden);
    auto [lin, poly] = run_quantum_experiment_both(cfg);
    rows.push_back({double(hidden), 4.0, lin.train_nrmse, lin.test_nrmse,
                    poly.train_nrmse, poly.test_nrmse});
    std::printf("hidden=%d  linear %.4f  poly %.4f\n", hidden, lin.test_nrmse,
                poly.test_nrmse);
    all.push_back(std::move(lin));
    all.push_back(std::move(poly));
  }
  io.write_qrc_table("fig3b_hidden_atoms.tsv", rows, "hidden_atoms");
  emit_report(all, base.out_dir);
  return 0;
}

int preset_axis_table(ExperimentConfig base, SweepAxis axis,
                      const std::vector<double>& values,
                      const std::string& name, WorkerPool& pool) {
  ensure_dir(base.out_dir);
  SweepResult lin_sweep, poly_sweep;
  base.regression = RegressionMode::linear;
  lin_sweep = sweep(base, axis, values, &pool);
  base.regression = RegressionMode::polynomial;
  poly_sweep = sweep(base, axis, values, &pool);

  std::ofstream out(base.out_dir + "/" + name);
  out.precision(10);
  out << to_string(axis)
      << "\ttrain_linear\ttest_linear\ttrain_poly\ttest_poly\terror\n";
  for (size_t i = 0; i < values.size(); ++i) {
    const auto& l = lin_sweep.rows[i];
    const auto& p = poly_sweep.rows[i];
    out << values[i] << '\t' << l.train_nrmse << '\t' << l.test_nrmse << '\t'
        << p.train_nrmse << '\t' << p.test_nrmse << '\t'
        << (l.error.empty() && p.error.empty() ? "-" : l.error + p.error)
        << '\n';
    std::printf("%s = %-8g linear %.4f  poly %.4f\n", to_string(axis),
                values[i], l.test_nrmse, p.test_nrmse);
  }
  std::vector<ExperimentResult> all;
  for (auto& r : lin_sweep.results) all.push_back(std::move(r));
  for (auto& r : poly_sweep.results) all.push_back(std::move(r));
  if (!all.empty()) emit_report(all, base.out_dir);
  return 0;
}

int cmd_reproduce(CliOptions& opt, const std::string& preset) {
  finalize_options(opt);
  ExperimentConfig base = opt.config;
  WorkerPool& pool = shared_pool(base.workers);
  if (preset == "fig3a") {
    base.task = TaskKind::mackey_glass;
    return preset_atom_scaling(base, "fig3a", pool);
  }
  if (preset == "fig3b") {
    base.task = TaskKind::mackey_glass;
    return preset_hidden_atoms(base, pool);
  }
  if (preset == "fig4") {
    base.task = TaskKind::mackey_glass;
    base.n_atom = 3;
    base.omega.clear();
    base.g.clear();
    return preset_axis_table(base, SweepAxis::delay,
                             {2, 5, 10, 20, 50, 100, 150, 200}, "fig4_delay.tsv",
                             pool);
  }
  if (preset == "fig5") {
    base.task = TaskKind::mackey_glass;
    base.n_atom = 3;
    base.omega.clear();
    base.g.clear();
    return preset_axis_table(base, SweepAxis::kappa,
                             {10, 100, 1000, 10000, 100000}, "fig5_kappa.tsv",
                             pool);
  }
  if (preset == "fig7a") {
    base.task = TaskKind::sine_square;
    return preset_atom_scaling(base, "fig7a", pool);
  }
  if (preset == "fig8a") {
    base.task = TaskKind::sine_square;
    base.n_atom = 5;
    base.regression = RegressionMode::polynomial;
    ensure_dir(base.out_dir);
    std::ofstream out(base.out_dir + "/fig8a_nss.tsv");
    out.precision(10);
    out << "n_ss\tladder\ttrain_poly\ttest_poly\n";
    std::vector<ExperimentResult> all;
    for (AtomLadder ladder : {AtomLadder::omega, AtomLadder::g}) {
      for (int nss : {8, 16, 32, 64}) {
        ExperimentConfig cfg = base;
        cfg.ladder = ladder;
        cfg.omega.clear();
        cfg.g.clear();
        cfg.n_ss = nss;
        cfg.label = std::string("fig8a_") + to_string(ladder) + "_nss" +
                    std::to_string(nss);
        auto [lin, poly] = run_quantum_experiment_both(cfg);
        out << nss << '\t' << to_string(ladder) << '\t' << poly.train_nrmse
            << '\t' << poly.test_nrmse << '\n';
        std::printf("%s n_ss=%d  poly %.4f\n", to_string(ladder), nss,
                    poly.test_nrmse);
        all.push_back(std::move(poly));
      }
    }
    emit_report(all, base.out_dir);
    return 0;
  }
  std::fprintf(stderr, "unknown preset %s\n", preset.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-atom cavity quantum reservoir computing harness"};
  app.require_subcommand(1);

  CliOptions run_opt, sweep_opt, repro_opt;
  std::string axis_name, values_csv, preset;

  app.footer(
      "Any subcommand accepts --config FILE with key=value lines (keys are\n"
      "the long option names); command-line flags override the file.");

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common_options(run_cmd, run_opt);
  run_cmd->add_option("--sme-trajectories", run_opt.sme_trajectories,
                      "also run this many stochastic trajectories");
  run_cmd->add_flag("--sme-dump", run_opt.sme_dump,
                    "write per-trajectory measurement records");
  run_cmd->add_option("--sme-dt", run_opt.sme_dt,
                      "Euler-Maruyama step for the trajectories");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one axis");
  add_common_options(sweep_cmd, sweep_opt);
  sweep_cmd
      ->add_option("--axis", axis_name,
                   "atoms | delay | kappa | n_ss | neurons | hidden_atoms")
      ->required();
  sweep_cmd->add_option("--values", values_csv, "comma list of axis values")
      ->required();

  CLI::App* repro_cmd =
      app.add_subcommand("reproduce", "generate figure data from presets");
  add_common_options(repro_cmd, repro_opt);
  repro_cmd
      ->add_option("--preset", preset,
                   "fig3a | fig3b | fig4 | fig5 | fig7a | fig8a")
      ->required();

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::vector<const char*> argv2;
  for (const auto& a : args) argv2.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv2.size()),
              const_cast<char**>(argv2.data()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opt);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt, axis_name, values_csv);
    if (repro_cmd->parsed()) return cmd_reproduce(repro_opt, preset);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
