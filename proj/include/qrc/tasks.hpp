#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrc {

struct ZoneLengths {
  int fading = 0;
  int training = 0;
  int testing = 0;
  int total() const { return fading + training + testing; }
};

enum class Zone { fading = 0, training = 1, testing = 2 };

inline const char* to_string(Zone z) {
  switch (z) {
    case Zone::fading: return "fading";
    case Zone::training: return "training";
    default: return "testing";
  }
}

/// Paired input/target series with its zone structure. f[k] is the input held
/// during the k-th sampling interval and y_target[k] the matching target.
struct TaskSeries {
  std::vector<double> f;
  std::vector<double> y_target;
  ZoneLengths zones;
  double dt_sample = 1.0;

  Zone zone_of(int k) const {
    if (k < zones.fading) return Zone::fading;
    if (k < zones.fading + zones.training) return Zone::training;
    return Zone::testing;
  }

  void validate() const {
    if (f.size() != y_target.size()) {
      throw std::invalid_argument("TaskSeries: input/target length mismatch");
    }
    if (static_cast<int>(f.size()) != zones.total()) {
      throw std::invalid_argument(
          "TaskSeries: length differs from the zone sum");
    }
  }
};

struct ZoneSlice {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
};

struct ZoneSlices {
  ZoneSlice fading, training, testing;
};

inline ZoneSlices zone_slices(const TaskSeries& series) {
  series.validate();
  ZoneSlices s;
  s.fading = {0, series.zones.fading};
  s.training = {series.zones.fading,
                series.zones.fading + series.zones.training};
  s.testing = {s.training.end, s.training.end + series.zones.testing};
  return s;
}

// ---------------------------------------------------------------------------
// Mackey-Glass

struct MackeyGlassConfig {
  double beta = 0.2;
  double gamma = 0.1;
  double tau = 17.0;
  double exponent = 10.0;
  double buffer = 1000.0;        // leading time units discarded
  double dt_sample = 1.0;
  int delay = 20;                // prediction horizon in samples
  double integration_step = 0.1;
  double history_init = 1.2;     // constant history on [-tau, 0]
  ZoneLengths zones{200, 2000, 1000};

  void validate() const {
    if (buffer < tau) {
      throw std::invalid_argument("MackeyGlassConfig: buffer must cover tau");
    }
    if (delay < 0) throw std::invalid_argument("MackeyGlassConfig: delay < 0");
    double ratio = dt_sample / integration_step;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9 * ratio) {
      throw std::invalid_argument(
          "MackeyGlassConfig: dt_sample must be an integer multiple of "
          "integration_step");
    }
  }
};

namespace detail {

/// Fixed-step RK4 integrator for the Mackey-Glass delay equation. Past values
/// are stored on the integration grid together with their derivatives, and
/// delayed lookups use cubic Hermite interpolation between grid nodes.
class MackeyGlassIntegrator {
 public:
  explicit MackeyGlassIntegrator(const MackeyGlassConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    f_.push_back(cfg.history_init);
    d_.push_back(derivative(cfg.history_init, cfg.history_init));
  }

  /// f at the current end of the integrated grid.
  double current() const { return f_.back(); }

  /// Advances by one integration step.
  void step() {
    const double h = cfg_.integration_step;
    const double t = (static_cast<double>(f_.size()) - 1.0) * h;
    const double y = f_.back();
    double k1 = derivative(y, delayed(t - cfg_.tau));
    double mid = delayed(t + 0.5 * h - cfg_.tau);
    double k2 = derivative(y + 0.5 * h * k1, mid);
    double k3 = derivative(y + 0.5 * h * k2, mid);
    double k4 = derivative(y + h * k3, delayed(t + h - cfg_.tau));
    double next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) {
      throw std::runtime_error("MackeyGlass: non-finite trajectory");
    }
    f_.push_back(next);
    d_.push_back(derivative(next, delayed(t + h - cfg_.tau)));
  }

 private:
  double derivative(double y, double y_delayed) const {
    return cfg_.beta * y_delayed /
               (1.0 + std::pow(y_delayed, cfg_.exponent)) -
           cfg_.gamma * y;
  }

  double delayed(double t) const {
    if (t <= 0.0) return cfg_.history_init;
    const double h = cfg_.integration_step;
    double x = t / h;
    auto k = static_cast<size_t>(x);
    if (k + 1 >= f_.size()) return f_.back();  // boundary; not hit for tau >> h
    double u = x - static_cast<double>(k);
    // Cubic Hermite on [k, k+1] from stored values and derivatives.
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * f_[k] + (u3 - 2 * u2 + u) * h * d_[k] +
           (-2 * u3 + 3 * u2) * f_[k + 1] + (u3 - u2) * h * d_[k + 1];
  }

  MackeyGlassConfig cfg_;
  std::vector<double> f_, d_;
};

}  // namespace detail

/// Raw Mackey-Glass samples f(buffer + k dt_sample), k = 0..n_samples-1.
inline std::vector<double> mackey_glass_samples(const MackeyGlassConfig& cfg,
                                                int n_samples) {
  detail::MackeyGlassIntegrator mg(cfg);
  int per_sample =
      static_cast<int>(std::lround(cfg.dt_sample / cfg.integration_step));
  int buffer_steps =
      static_cast<int>(std::lround(cfg.buffer / cfg.integration_step));
  for (int s = 0; s < buffer_steps; ++s) mg.step();
  std::vector<double> out;
  out.reserve(n_samples);
  out.push_back(mg.current());
  for (int k = 1; k < n_samples; ++k) {
    for (int s = 0; s < per_sample; ++s) mg.step();
    out.push_back(mg.current());
  }
  return out;
}

/// Input/target series for the prediction task: the target is the input
/// shifted forward by the configured delay, so the generator integrates
/// `delay` extra samples past the end of the driven range.
inline TaskSeries mackey_glass_series(const MackeyGlassConfig& cfg,
                                      int total_steps) {
  cfg.validate();
  if (total_steps < 1) {
    throw std::invalid_argument("mackey_glass_series: total_steps < 1");
  }
  std::vector<double> raw = mackey_glass_samples(cfg, total_steps + cfg.delay);
  TaskSeries series;
  series.dt_sample = cfg.dt_sample;
  series.zones = cfg.zones;
  series.f.assign(raw.begin(), raw.begin() + total_steps);
  series.y_target.resize(total_steps);
  for (int k = 0; k < total_steps; ++k) series.y_target[k] = raw[k + cfg.delay];
  if (cfg.zones.total() != total_steps) {
    throw std::invalid_argument(
        "mackey_glass_series: zone lengths must sum to total_steps");
  }
  series.validate();
  return series;
}

inline TaskSeries mackey_glass_series(const MackeyGlassConfig& cfg) {
  return mackey_glass_series(cfg, cfg.zones.total());
}

// ---------------------------------------------------------------------------
// Sine-square classification

struct SineSquareConfig {
  int fading_waveforms = 10;
  int training_waveforms = 50;
  int testing_waveforms = 50;
  int n_ss = 8;                  // samples per waveform
  double omega_ss = 10.0;        // waveform angular frequency
  std::uint64_t seed = 1;

  int n_waveforms() const {
    return fading_waveforms + training_waveforms + testing_waveforms;
  }
  double dt_sample() const { return 2.0 * M_PI / (n_ss * omega_ss); }

  void validate() const {
    if (n_ss < 2) throw std::invalid_argument("SineSquareConfig: n_ss < 2");
    if (omega_ss <= 0) {
      throw std::invalid_argument("SineSquareConfig: omega_ss <= 0");
    }
    if (fading_waveforms < 0 || training_waveforms <= 0 ||
        testing_waveforms <= 0) {
      throw std::invalid_argument("SineSquareConfig: bad waveform split");
    }
  }
};

/// Random sine/square waveform sequence. Each waveform spans one full period
/// in n_ss samples: sine emits sin(2 pi j / n_ss); square emits +1 on the
/// first half-period and -1 on the second. Targets are 1 for sine samples and
/// 0 for square samples.
inline TaskSeries sine_square_input(const SineSquareConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  TaskSeries series;
  series.dt_sample = cfg.dt_sample();
  series.zones = ZoneLengths{cfg.fading_waveforms * cfg.n_ss,
                             cfg.training_waveforms * cfg.n_ss,
                             cfg.testing_waveforms * cfg.n_ss};
  series.f.reserve(cfg.n_waveforms() * cfg.n_ss);
  series.y_target.reserve(cfg.n_waveforms() * cfg.n_ss);
  for (int w = 0; w < cfg.n_waveforms(); ++w) {
    bool is_sine = (rng() & 1ull) != 0;
    for (int j = 0; j < cfg.n_ss; ++j) {
      double v;
      if (is_sine) {
        v = std::sin(2.0 * M_PI * j / cfg.n_ss);
      } else {
        v = (2 * j < cfg.n_ss) ? 1.0 : -1.0;
      }
      series.f.push_back(v);
      series.y_target.push_back(is_sine ? 1.0 : 0.0);
    }
  }
  series.validate();
  return series;
}

// ---------------------------------------------------------------------------
// Plain-text series files

/// Writes columns (k, t_k, f_k, y_target_k, zone), optionally with the
/// predicted output y_k appended. Values are printed with round-trip
/// precision.
inline void write_task_series(const std::string& path, const TaskSeries& series,
                              const std::vector<double>* y_actual = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_task_series: cannot open " + path);
  out.precision(17);
  out << "k\tt\tf\ty_target";
  if (y_actual) out << "\ty_actual";
  out << "\tzone\n";
  for (size_t k = 0; k < series.f.size(); ++k) {
    out << k << '\t' << k * series.dt_sample << '\t' << series.f[k] << '\t'
        << series.y_target[k];
    if (y_actual) out << '\t' << (*y_actual)[k];
    out << '\t' << to_string(series.zone_of(static_cast<int>(k))) << '\n';
  }
}

}  // namespace qrc
