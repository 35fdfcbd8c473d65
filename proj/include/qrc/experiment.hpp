#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrc/esn.hpp"
#include "qrc/features.hpp"
#include "qrc/io.hpp"
#include "qrc/lindblad.hpp"
#include "qrc/operators.hpp"
#include "qrc/parallel.hpp"
#include "qrc/regression.hpp"
#include "qrc/tasks.hpp"
#include "qrc/version.hpp"

namespace qrc {

using json = nlohmann::ordered_json;

enum class TaskKind { mackey_glass, sine_square };
enum class ReservoirKind { quantum, esn };
enum class AtomLadder { omega, g };

inline const char* to_string(TaskKind t) {
  return t == TaskKind::mackey_glass ? "mackey_glass" : "sine_square";
}
inline const char* to_string(ReservoirKind r) {
  return r == ReservoirKind::quantum ? "quantum" : "esn";
}
inline const char* to_string(AtomLadder l) {
  return l == AtomLadder::omega ? "omega" : "g";
}

/// Detuning/coupling families used for the atom-count scaling study: either
/// the detunings fan out at fixed coupling, or the couplings fan out at fixed
/// detuning.
inline std::vector<double> ladder_omegas(AtomLadder ladder, int n_atom) {
  static const std::vector<std::vector<double>> omega_sets = {
      {20}, {0, 40}, {0, 20, 40}, {0, 10, 30, 40}, {0, 10, 20, 30, 40}};
  if (n_atom < 1 || n_atom > 5) {
    throw std::invalid_argument(
        "ladder parameters are defined for 1..5 atoms; pass explicit lists");
  }
  if (ladder == AtomLadder::omega) return omega_sets[n_atom - 1];
  return std::vector<double>(n_atom, 20.0);
}

inline std::vector<double> ladder_couplings(AtomLadder ladder, int n_atom) {
  static const std::vector<std::vector<double>> g_sets = {
      {30}, {10, 50}, {10, 30, 50}, {10, 20, 40, 50}, {10, 20, 30, 40, 50}};
  if (n_atom < 1 || n_atom > 5) {
    throw std::invalid_argument(
        "ladder parameters are defined for 1..5 atoms; pass explicit lists");
  }
  if (ladder == AtomLadder::omega) return std::vector<double>(n_atom, 30.0);
  return g_sets[n_atom - 1];
}

/// Atom parameters for the hidden-atom study: atom 0 is the measured one
/// (omega = 20, g = 30) and hidden atoms take detunings from the scaling
/// ladder values in order of appearance (0, 40, 10, 30), which reproduces the
/// odd-count ladders exactly.
inline void hidden_atom_params(int hidden, std::vector<double>& omega,
                               std::vector<double>& g) {
  static const std::vector<double> pool_values{0.0, 40.0, 10.0, 30.0};
  if (hidden < 0 || hidden > static_cast<int>(pool_values.size())) {
    throw std::invalid_argument("hidden_atom_params: supported range is 0..4");
  }
  omega = {20.0};
  for (int i = 0; i < hidden; ++i) omega.push_back(pool_values[i]);
  g.assign(1 + hidden, 30.0);
}

struct ExperimentConfig {
  std::string label = "run";
  TaskKind task = TaskKind::mackey_glass;
  ReservoirKind reservoir = ReservoirKind::quantum;
  RegressionMode regression = RegressionMode::linear;

  // quantum reservoir
  int n_atom = 1;
  std::vector<double> omega;  // empty: filled from the ladder
  std::vector<double> g;      // empty: filled from the ladder
  AtomLadder ladder = AtomLadder::omega;
  double omega_c = 40.0;
  double epsilon = 20.0;
  double kappa = 10.0;
  int n_fock = 8;
  double substep = 0.0;  // <= 0: stability-derived automatic choice
  double fock_tail_threshold = 0.05;
  int hidden_atoms = 0;

  // classical baseline
  int esn_neurons = 0;  // 0: match the quantum readout count 2N+2
  int esn_ensemble = 1000;
  double esn_spectral_cap = 0.95;

  // Mackey-Glass task
  int delay = 20;
  ZoneLengths mg_zones{200, 2000, 1000};
  double mg_integration_step = 0.1;

  // sine-square task
  int n_ss = 8;
  double omega_ss = 10.0;
  int ss_fading_waveforms = 10;
  int ss_training_waveforms = 50;
  int ss_testing_waveforms = 50;

  double ridge_delta = kDefaultRidgeDelta;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  std::string out_dir = "qrc_out";

  int measured_atoms() const { return n_atom - hidden_atoms; }

  void resolve() {
    if (n_atom < 1) throw std::invalid_argument("config: n_atom must be >= 1");
    if (omega.empty()) omega = ladder_omegas(ladder, n_atom);
    if (g.empty()) g = ladder_couplings(ladder, n_atom);
    if (static_cast<int>(omega.size()) != n_atom ||
        static_cast<int>(g.size()) != n_atom) {
      throw std::invalid_argument(
          "config: omega/g lists must match the atom count");
    }
    if (hidden_atoms < 0 || hidden_atoms >= n_atom) {
      throw std::invalid_argument(
          "config: hidden_atoms must be in [0, n_atom)");
    }
    if (esn_neurons <= 0) esn_neurons = 2 * measured_atoms() + 2;
    validate_zones();
  }

  void validate_zones() const {
    if (task == TaskKind::mackey_glass) {
      if (mg_zones.training <= 0 || mg_zones.testing <= 0) {
        throw std::invalid_argument(
            "config: training and testing zones must be non-empty");
      }
    } else {
      if (ss_training_waveforms <= 0 || ss_testing_waveforms <= 0) {
        throw std::invalid_argument(
            "config: training and testing zones must be non-empty");
      }
    }
  }

  ReservoirParams reservoir_params() const {
    ReservoirParams p;
    p.omega_c = omega_c;
    p.omega = omega;
    p.g = g;
    p.epsilon = epsilon;
    p.kappa = kappa;
    return p;
  }

  TaskSeries build_series() const {
    if (task == TaskKind::mackey_glass) {
      MackeyGlassConfig mg;
      mg.delay = delay;
      mg.zones = mg_zones;
      mg.integration_step = mg_integration_step;
      return mackey_glass_series(mg);
    }
    SineSquareConfig ss;
    ss.n_ss = n_ss;
    ss.omega_ss = omega_ss;
    ss.fading_waveforms = ss_fading_waveforms;
    ss.training_waveforms = ss_training_waveforms;
    ss.testing_waveforms = ss_testing_waveforms;
    ss.seed = seed;
    return sine_square_input(ss);
  }

  json to_json() const {
    json j;
    j["label"] = label;
    j["task"] = to_string(task);
    j["reservoir"] = to_string(reservoir);
    j["regression"] = to_string(regression);
    j["n_atom"] = n_atom;
    j["omega"] = omega;
    j["g"] = g;
    j["ladder"] = to_string(ladder);
    j["omega_c"] = omega_c;
    j["epsilon"] = epsilon;
    j["kappa"] = kappa;
    j["n_fock"] = n_fock;
    j["substep"] = substep;
    j["fock_tail_threshold"] = fock_tail_threshold;
    j["hidden_atoms"] = hidden_atoms;
    j["esn_neurons"] = esn_neurons;
    j["esn_ensemble"] = esn_ensemble;
    j["esn_spectral_cap"] = esn_spectral_cap;
    j["delay"] = delay;
    j["mg_zones"] = {mg_zones.fading, mg_zones.training, mg_zones.testing};
    j["mg_integration_step"] = mg_integration_step;
    j["n_ss"] = n_ss;
    j["omega_ss"] = omega_ss;
    j["ss_waveforms"] = {ss_fading_waveforms, ss_training_waveforms,
                         ss_testing_waveforms};
    j["ridge_delta"] = ridge_delta;
    j["seed"] = seed;
    return j;
  }
};

struct ExperimentResult {
  std::string label;
  double train_nrmse = 0.0;
  double test_nrmse = 0.0;
  RealVector y_actual;  // predictions over the full series
  TaskSeries series;
  RealVector weights;
  std::vector<std::string> weight_names;
  json metadata;
};

/// Everything produced by driving one quantum reservoir through a series:
/// the raw sampled observable expectations plus run diagnostics. Feature
/// construction and training are separate so several regressions can reuse
/// one evolution.
struct ReservoirRun {
  RealMatrix samples;  // steps x (2 n_atom + 2)
  std::uint64_t series_hash = 0;
  std::uint64_t trajectory_hash = 0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  double max_top_fock = 0.0;
  int substeps_per_interval = 0;
  double wall_seconds = 0.0;
};

/// Drives the reservoir with the series inputs and samples every observable
/// at the end of each held-input interval. State-validity monitors
/// (trace, Hermiticity, positivity, truncation tail) are accumulated at every
/// sampling instant.
inline ReservoirRun run_quantum_reservoir(const ExperimentConfig& config,
                                          const TaskSeries& series) {
  auto t0 = std::chrono::steady_clock::now();
  HilbertSpace space = build_space(config.n_fock, config.n_atom);
  ReservoirParams params = config.reservoir_params();
  LindbladEngine engine(space, params);
  double f_max = 0.0;
  for (double v : series.f) f_max = std::max(f_max, std::abs(v));
  engine.set_max_input(f_max);

  OperatorSet ops = observable_set(space);
  auto observables = ops.observables();
  const int n_obs = static_cast<int>(observables.size());
  const int len = static_cast<int>(series.f.size());

  EvolutionConfig evo;
  evo.dt_sample = series.dt_sample;
  evo.substep = config.substep;
  // The square waveforms jump between +-1 each half period; resolving those
  // onsets needs substeps well below the plain stability limit to keep the
  // sampled states positive at the 1e-8 tolerance.
  evo.substep_refine = config.task == TaskKind::sine_square ? 5 : 1;
  evo.fock_tail_threshold = config.fock_tail_threshold;

  ReservoirRun run;
  run.samples.resize(len, n_obs);
  run.series_hash = fnv1a_hash(series.f);

  DensityMatrix dm = vacuum_ground_state(space);
  for (int k = 0; k < len; ++k) {
    EvolveStats stats = engine.evolve_interval(dm, series.f[k], evo);
    run.substeps_per_interval =
        std::max(run.substeps_per_interval, stats.substeps_planned);
    run.max_top_fock = std::max(run.max_top_fock, stats.top_fock_population);
    run.max_trace_error =
        std::max(run.max_trace_error, std::abs(dm.trace() - 1.0));
    run.max_hermiticity_error =
        std::max(run.max_hermiticity_error, dm.hermiticity_error());
    run.min_eigenvalue = std::min(run.min_eigenvalue, dm.min_eigenvalue());
    if (run.min_eigenvalue <= -1e-8) {
      throw std::runtime_error(
          "run_quantum_reservoir: state lost positivity beyond tolerance "
          "at sample " +
          std::to_string(k));
    }
    for (int o = 0; o < n_obs; ++o) {
      run.samples(k, o) = expectation(dm, *observables[o]);
    }
    for (int i = 0; i < space.n_atom; ++i) {
      double sx = run.samples(k, 2 + 2 * i);
      double sy = run.samples(k, 3 + 2 * i);
      if (std::abs(sx) > 1.0 + 1e-9 || std::abs(sy) > 1.0 + 1e-9) {
        throw std::runtime_error(
            "run_quantum_reservoir: Pauli expectation out of bounds");
      }
    }
  }
  std::vector<double> flat(run.samples.data(),
                           run.samples.data() + run.samples.size());
  run.trajectory_hash = fnv1a_hash(flat);
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return run;
}

/// Builds the design matrix over the measured observables (cavity plus the
/// first n_atom - hidden_atoms atoms) in the requested regression mode.
inline RealMatrix build_design_matrix(const ReservoirRun& run,
                                      const ExperimentConfig& config,
                                      RegressionMode mode) {
  const int n_meas = 2 * config.measured_atoms() + 2;
  const int len = static_cast<int>(run.samples.rows());
  RealMatrix x(len, feature_count(config.measured_atoms(), mode) + 1);
  std::vector<double> values(n_meas);
  for (int k = 0; k < len; ++k) {
    for (int o = 0; o < n_meas; ++o) values[o] = run.samples(k, o);
    x.row(k) = make_features(values, mode).transpose();
  }
  return x;
}

struct ScoredRegression {
  double train_nrmse = 0.0;
  double test_nrmse = 0.0;
  RealVector y_actual;
  RealVector weights;
};

/// Trains on the training zone and scores both zones; predictions cover the
/// whole series for reporting.
inline ScoredRegression score_design(const RealMatrix& x,
                                     const TaskSeries& series, double delta) {
  ZoneSlices z = zone_slices(series);
  RealMatrix x_train = x.middleRows(z.training.begin, z.training.length());
  RealVector y_train(z.training.length());
  for (int k = 0; k < z.training.length(); ++k) {
    y_train(k) = series.y_target[z.training.begin + k];
  }
  ScoredRegression out;
  out.weights = train_ridge(x_train, y_train, delta);
  out.y_actual = predict(x, out.weights);
  out.train_nrmse =
      nrmse(out.y_actual.segment(z.training.begin, z.training.length()),
            y_train);
  RealVector y_test(z.testing.length());
  for (int k = 0; k < z.testing.length(); ++k) {
    y_test(k) = series.y_target[z.testing.begin + k];
  }
  out.test_nrmse =
      nrmse(out.y_actual.segment(z.testing.begin, z.testing.length()), y_test);
  return out;
}

inline json run_metadata(const ExperimentConfig& config,
                         const ReservoirRun& run) {
  json j;
  j["config"] = config.to_json();
  j["code_version"] = kQrcVersion;
  j["series_hash"] = hash_string(run.series_hash);
  j["trajectory_hash"] = hash_string(run.trajectory_hash);
  j["monitors"] = {{"max_trace_error", run.max_trace_error},
                   {"max_hermiticity_error", run.max_hermiticity_error},
                   {"min_eigenvalue", run.min_eigenvalue},
                   {"max_top_fock_population", run.max_top_fock},
                   {"substeps_per_interval", run.substeps_per_interval}};
  j["timing"] = {{"reservoir_seconds", run.wall_seconds}};
  return j;
}

inline ExperimentResult run_quantum_experiment(const ExperimentConfig& raw) {
  ExperimentConfig config = raw;
  config.resolve();
  TaskSeries series = config.build_series();
  ReservoirRun run = run_quantum_reservoir(config, series);
  RealMatrix x = build_design_matrix(run, config, config.regression);
  ScoredRegression scored = score_design(x, series, config.ridge_delta);

  ExperimentResult result;
  result.label = config.label;
  result.train_nrmse = scored.train_nrmse;
  result.test_nrmse = scored.test_nrmse;
  result.y_actual = scored.y_actual;
  result.series = series;
  result.weights = scored.weights;
  result.weight_names = feature_names(
      OperatorSet::observable_names(config.measured_atoms()),
      config.regression);
  result.metadata = run_metadata(config, run);
  return result;
}

/// One reservoir evolution scored with both regression modes; the expensive
/// dynamics are shared, only the feature map and training differ.
inline std::pair<ExperimentResult, ExperimentResult> run_quantum_experiment_both(
    const ExperimentConfig& raw) {
  ExperimentConfig config = raw;
  config.resolve();
  TaskSeries series = config.build_series();
  ReservoirRun run = run_quantum_reservoir(config, series);

  auto score_mode = [&](RegressionMode mode) {
    RealMatrix x = build_design_matrix(run, config, mode);
    ScoredRegression scored = score_design(x, series, config.ridge_delta);
    ExperimentResult result;
    result.label = config.label + "_" + to_string(mode);
    result.train_nrmse = scored.train_nrmse;
    result.test_nrmse = scored.test_nrmse;
    result.y_actual = scored.y_actual;
    result.series = series;
    result.weights = scored.weights;
    result.weight_names = feature_names(
        OperatorSet::observable_names(config.measured_atoms()), mode);
    result.metadata = run_metadata(config, run);
    result.metadata["config"]["regression"] = to_string(mode);
    return result;
  };
  return {score_mode(RegressionMode::linear),
          score_mode(RegressionMode::polynomial)};
}

inline ExperimentResult run_esn_experiment(const ExperimentConfig& raw,
                                           WorkerPool* pool = nullptr) {
  ExperimentConfig config = raw;
  config.resolve();
  TaskSeries series = config.build_series();
  std::uint64_t master_seed = config.seed ^ 0x5851f42d4c957f2dull;
  EsnEnsembleResult ens =
      ensemble_nrmse(config.esn_neurons, series, config.esn_ensemble,
                     master_seed, config.esn_spectral_cap, config.ridge_delta,
                     pool);

  ExperimentResult result;
  result.label = config.label;
  result.train_nrmse = ens.mean_train_nrmse;
  result.test_nrmse = ens.mean_test_nrmse;
  result.series = series;
  result.metadata["config"] = config.to_json();
  result.metadata["code_version"] = kQrcVersion;
  result.metadata["series_hash"] = hash_string(fnv1a_hash(series.f));
  result.metadata["esn"] = {{"mean_test_nrmse", ens.mean_test_nrmse},
                            {"stderr_test_nrmse", ens.stderr_test_nrmse},
                            {"mean_train_nrmse", ens.mean_train_nrmse},
                            {"stderr_train_nrmse", ens.stderr_train_nrmse},
                            {"ensemble_size", ens.ensemble_size},
                            {"master_seed", master_seed}};
  return result;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepAxis { n_atom, delay, kappa, n_ss, neurons, hidden_atoms };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::n_atom: return "n_atom";
    case SweepAxis::delay: return "delay";
    case SweepAxis::kappa: return "kappa";
    case SweepAxis::n_ss: return "n_ss";
    case SweepAxis::neurons: return "neurons";
    default: return "hidden_atoms";
  }
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "n_atom" || s == "atoms") return SweepAxis::n_atom;
  if (s == "delay") return SweepAxis::delay;
  if (s == "kappa") return SweepAxis::kappa;
  if (s == "n_ss") return SweepAxis::n_ss;
  if (s == "neurons") return SweepAxis::neurons;
  if (s == "hidden_atoms" || s == "hidden") return SweepAxis::hidden_atoms;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

struct SweepRow {
  double value = 0.0;
  double train_nrmse = 0.0;
  double test_nrmse = 0.0;
  double stderr_test = 0.0;  // ESN reservoirs only
  std::string error;         // non-empty if this point failed
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepRow> rows;
  std::vector<ExperimentResult> results;  // successful points, in value order
  json metadata;
};

/// Applies one sweep value to a copy of the template configuration.
inline ExperimentConfig apply_sweep_value(const ExperimentConfig& base,
                                          SweepAxis axis, double value) {
  ExperimentConfig cfg = base;
  cfg.label = base.label + "_" + to_string(axis) + "_" +
              std::to_string(value);
  switch (axis) {
    case SweepAxis::n_atom:
      cfg.n_atom = static_cast<int>(value);
      cfg.omega.clear();
      cfg.g.clear();
      break;
    case SweepAxis::delay:
      cfg.delay = static_cast<int>(value);
      break;
    case SweepAxis::kappa:
      cfg.kappa = value;
      break;
    case SweepAxis::n_ss:
      cfg.n_ss = static_cast<int>(value);
      break;
    case SweepAxis::neurons:
      cfg.esn_neurons = static_cast<int>(value);
      break;
    case SweepAxis::hidden_atoms: {
      int hidden = static_cast<int>(value);
      hidden_atom_params(hidden, cfg.omega, cfg.g);
      cfg.n_atom = 1 + hidden;
      cfg.hidden_atoms = hidden;
      break;
    }
  }
  return cfg;
}

/// Runs one experiment per value. Failed points are recorded and the sweep
/// continues; rows stay in value order regardless of scheduling.
inline SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                         const std::vector<double>& values,
                         WorkerPool* pool = nullptr) {
  SweepResult out;
  out.axis = axis;
  out.rows.resize(values.size());
  std::vector<std::optional<ExperimentResult>> slots(values.size());

  // One shared reservoir run serves every delay: the drive does not depend
  // on the prediction horizon, only the targets shift.
  if (axis == SweepAxis::delay && base.task == TaskKind::mackey_glass &&
      base.reservoir == ReservoirKind::quantum) {
    ExperimentConfig config = base;
    config.resolve();
    int max_delay = 0;
    for (double v : values) max_delay = std::max(max_delay, (int)v);
    MackeyGlassConfig mg;
    mg.delay = max_delay;
    mg.zones = config.mg_zones;
    mg.integration_step = config.mg_integration_step;
    std::vector<double> raw =
        mackey_glass_samples(mg, config.mg_zones.total() + max_delay);
    TaskSeries drive_series;
    drive_series.dt_sample = mg.dt_sample;
    drive_series.zones = config.mg_zones;
    drive_series.f.assign(raw.begin(), raw.begin() + config.mg_zones.total());
    drive_series.y_target.assign(drive_series.f.size(), 0.0);

    ReservoirRun run = run_quantum_reservoir(config, drive_series);
    RealMatrix x = build_design_matrix(run, config, config.regression);
    for (size_t i = 0; i < values.size(); ++i) {
      int d = static_cast<int>(values[i]);
      out.rows[i].value = values[i];
      try {
        TaskSeries series = drive_series;
        for (size_t k = 0; k < series.f.size(); ++k) {
          series.y_target[k] = raw[k + d];
        }
        ScoredRegression scored = score_design(x, series, config.ridge_delta);
        out.rows[i].train_nrmse = scored.train_nrmse;
        out.rows[i].test_nrmse = scored.test_nrmse;
        ExperimentResult r;
        r.label = config.label + "_delay_" + std::to_string(d);
        r.train_nrmse = scored.train_nrmse;
        r.test_nrmse = scored.test_nrmse;
        r.y_actual = scored.y_actual;
        r.series = series;
        r.weights = scored.weights;
        r.weight_names = feature_names(
            OperatorSet::observable_names(config.measured_atoms()),
            config.regression);
        r.metadata = run_metadata(config, run);
        r.metadata["config"]["delay"] = d;
        slots[i] = std::move(r);
      } catch (const std::exception& e) {
        out.rows[i].error = e.what();
      }
    }
  } else {
    auto run_point = [&](size_t i) {
      out.rows[i].value = values[i];
      try {
        ExperimentConfig cfg = apply_sweep_value(base, axis, values[i]);
        ExperimentResult r = cfg.reservoir == ReservoirKind::quantum
                                 ? run_quantum_experiment(cfg)
                                 : run_esn_experiment(cfg);
        out.rows[i].train_nrmse = r.train_nrmse;
        out.rows[i].test_nrmse = r.test_nrmse;
        if (cfg.reservoir == ReservoirKind::esn) {
          out.rows[i].stderr_test = r.metadata["esn"]["stderr_test_nrmse"];
        }
        slots[i] = std::move(r);
      } catch (const std::exception& e) {
        out.rows[i].error = e.what();
      }
    };
    if (pool && pool->size() > 1) {
      std::atomic<size_t> next{0};
      pool->parallel_for(
          static_cast<std::int64_t>(values.size()),
          [&](std::int64_t, std::int64_t) {
            // Dynamic scheduling: points have very uneven costs.
            for (size_t i = next.fetch_add(1); i < values.size();
                 i = next.fetch_add(1)) {
              run_point(i);
            }
          });
    } else {
      for (size_t i = 0; i < values.size(); ++i) run_point(i);
    }
  }

  for (auto& slot : slots) {
    if (slot.has_value()) out.results.push_back(std::move(*slot));
  }
  out.metadata["axis"] = to_string(axis);
  out.metadata["values"] = values;
  out.metadata["template"] = base.to_json();
  out.metadata["code_version"] = kQrcVersion;
  return out;
}

// ---------------------------------------------------------------------------
// Reporting

inline void write_metadata_text(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  std::function<void(const json&, const std::string&)> walk =
      [&](const json& node, const std::string& prefix) {
        if (node.is_object()) {
          for (auto it = node.begin(); it != node.end(); ++it) {
            walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
          }
        } else {
          out << prefix << '\t' << node.dump() << '\n';
        }
      };
  walk(j, "");
}

/// Writes the per-run series file, the weight vector, a plain-text metadata
/// file and one structured JSON summary into the output directory.
inline void emit_report(const std::vector<ExperimentResult>& results,
                        const std::string& out_dir) {
  if (results.empty()) {
    throw std::invalid_argument("emit_report: no results to write");
  }
  ensure_dir(out_dir);
  json summary;
  summary["code_version"] = kQrcVersion;
  summary["runs"] = json::array();
  for (const auto& r : results) {
    std::vector<double> y(r.y_actual.data(), r.y_actual.data() + r.y_actual.size());
    if (!y.empty()) {
      write_task_series(out_dir + "/" + r.label + "_series.tsv", r.series, &y);
    }
    if (r.weights.size() > 0) {
      save_weights(out_dir + "/" + r.label + "_weights.tsv", r.weights,
                   r.weight_names);
    }
    write_metadata_text(out_dir + "/" + r.label + "_metadata.tsv", r.metadata);
    json run;
    run["label"] = r.label;
    run["train_nrmse"] = r.train_nrmse;
    run["test_nrmse"] = r.test_nrmse;
    run["metadata"] = r.metadata;
    summary["runs"].push_back(run);
  }
  std::ofstream js(out_dir + "/summary.json");
  js << summary.dump(2) << '\n';
}

inline void write_sweep_table(const SweepResult& sweep_result,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << to_string(sweep_result.axis)
      << "\ttrain_nrmse\ttest_nrmse\tstderr_test\terror\n";
  for (const auto& row : sweep_result.rows) {
    out << row.value << '\t' << row.train_nrmse << '\t' << row.test_nrmse
        << '\t' << row.stderr_test << '\t'
        << (row.error.empty() ? "-" : row.error) << '\n';
  }
}

}  // namespace qrc
