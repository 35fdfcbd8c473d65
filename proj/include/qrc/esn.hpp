#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "qrc/parallel.hpp"
#include "qrc/regression.hpp"
#include "qrc/tasks.hpp"
#include "qrc/types.hpp"

namespace qrc {

/// Echo state network x_{k+1} = ReLU(A x_k + B f_k) with random fixed A, B.
struct EsnParams {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double spectral_cap = 0.95;

  int n_neurons() const { return static_cast<int>(b.size()); }
};

using EsnState = Eigen::VectorXd;

/// Draws A and B with i.i.d. standard Gaussian entries and rescales A so its
/// largest singular value equals spectral_cap (< 1 guarantees the echo-state
/// contraction).
inline EsnParams init_esn(int n_neurons, std::uint64_t seed,
                          double spectral_cap = 0.95) {
  if (n_neurons < 1) throw std::invalid_argument("init_esn: n_neurons < 1");
  if (spectral_cap <= 0.0 || spectral_cap >= 1.0) {
    throw std::invalid_argument("init_esn: spectral_cap must be in (0, 1)");
  }
  std::seed_seq seq{static_cast<std::uint64_t>(0x9e3779b97f4a7c15ull), seed};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EsnParams p;
  p.spectral_cap = spectral_cap;
  p.a.resize(n_neurons, n_neurons);
  p.b.resize(n_neurons);
  for (int i = 0; i < n_neurons; ++i) {
    for (int j = 0; j < n_neurons; ++j) p.a(i, j) = gauss(rng);
  }
  for (int i = 0; i < n_neurons; ++i) p.b(i) = gauss(rng);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.a);
  double sigma_max = svd.singularValues()(0);
  if (sigma_max > 0.0) p.a *= spectral_cap / sigma_max;
  return p;
}

inline EsnState esn_step(const EsnState& state, double f_k,
                         const EsnParams& params) {
  return (params.a * state + params.b * f_k).cwiseMax(0.0);
}

/// Iterates the network from x_0 = 0 through the whole series and returns the
/// design matrix (bias column followed by the state), one row per step. Row k
/// holds the state after consuming f_k, matching the quantum convention of
/// sampling at the end of each held-input interval.
inline RealMatrix run_esn(const EsnParams& params, const TaskSeries& series) {
  series.validate();
  const int n = params.n_neurons();
  const int len = static_cast<int>(series.f.size());
  RealMatrix features(len, n + 1);
  EsnState x = EsnState::Zero(n);
  for (int k = 0; k < len; ++k) {
    x = esn_step(x, series.f[k], params);
    if (!x.allFinite()) {
      throw std::runtime_error("run_esn: non-finite state");
    }
    features(k, 0) = 1.0;
    features.row(k).tail(n) = x.transpose();
  }
  return features;
}

struct EsnEnsembleResult {
  double mean_test_nrmse = 0.0;
  double stderr_test_nrmse = 0.0;
  double mean_train_nrmse = 0.0;
  double stderr_train_nrmse = 0.0;
  int ensemble_size = 0;
};

/// Trains and scores M independently initialized networks on the same series
/// and averages the resulting errors. Member seeds are split from the master
/// seed by index, so results do not depend on scheduling order.
inline EsnEnsembleResult ensemble_nrmse(int n_neurons, const TaskSeries& series,
                                        int ensemble, std::uint64_t seed,
                                        double spectral_cap = 0.95,
                                        double delta = kDefaultRidgeDelta,
                                        WorkerPool* pool = nullptr) {
  if (ensemble < 1) throw std::invalid_argument("ensemble_nrmse: M < 1");
  ZoneSlices z = zone_slices(series);
  if (z.training.length() < 2 || z.testing.length() < 2) {
    throw std::invalid_argument("ensemble_nrmse: zones too short to score");
  }
  std::vector<double> test_scores(ensemble), train_scores(ensemble);
  std::vector<std::string> failures(ensemble);

  auto run_member = [&](int m) {
    try {
      EsnParams params = init_esn(n_neurons, seed + static_cast<std::uint64_t>(m),
                                  spectral_cap);
      RealMatrix features = run_esn(params, series);
      RealMatrix x_train = features.middleRows(z.training.begin, z.training.length());
      RealMatrix x_test = features.middleRows(z.testing.begin, z.testing.length());
      RealVector y_train(z.training.length()), y_test(z.testing.length());
      for (int k = 0; k < z.training.length(); ++k) {
        y_train(k) = series.y_target[z.training.begin + k];
      }
      for (int k = 0; k < z.testing.length(); ++k) {
        y_test(k) = series.y_target[z.testing.begin + k];
      }
      RealVector w = train_ridge(x_train, y_train, delta);
      train_scores[m] = nrmse(predict(x_train, w), y_train);
      test_scores[m] = nrmse(predict(x_test, w), y_test);
    } catch (const std::exception& e) {
      failures[m] = e.what();
    }
  };

  if (pool && pool->size() > 1) {
    pool->parallel_for(ensemble, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t m = lo; m < hi; ++m) run_member(static_cast<int>(m));
    });
  } else {
    for (int m = 0; m < ensemble; ++m) run_member(m);
  }
  for (int m = 0; m < ensemble; ++m) {
    if (!failures[m].empty()) {
      throw std::runtime_error("ensemble_nrmse: member " + std::to_string(m) +
                               " failed: " + failures[m]);
    }
  }

  auto mean_stderr = [&](const std::vector<double>& v, double& mean,
                         double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    se = v.size() > 1 ? std::sqrt(var / (v.size() - 1.0) / v.size()) : 0.0;
  };
  EsnEnsembleResult r;
  r.ensemble_size = ensemble;
  mean_stderr(test_scores, r.mean_test_nrmse, r.stderr_test_nrmse);
  mean_stderr(train_scores, r.mean_train_nrmse, r.stderr_train_nrmse);
  return r;
}

}  // namespace qrc
