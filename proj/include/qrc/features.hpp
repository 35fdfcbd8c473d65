#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qrc/types.hpp"

namespace qrc {

enum class RegressionMode { linear, polynomial };

inline const char* to_string(RegressionMode m) {
  return m == RegressionMode::linear ? "linear" : "polynomial";
}

/// One sampled readout row: the ordered observable expectations
/// (<Q>, <P>, <sx_1>, <sy_1>, ...) at time t_k.
struct ReadoutSample {
  double t_k = 0.0;
  std::vector<double> values;
};

/// Number of regression features (excluding the bias) for a reservoir with
/// n_atom measured atoms: 2N+2 readouts, plus all distinct quadratic
/// monomials in the polynomial mode, which totals 2N^2 + 7N + 5.
inline int feature_count(int n_atom, RegressionMode mode) {
  int m = 2 * n_atom + 2;
  if (mode == RegressionMode::linear) return m;
  return m + m * (m + 1) / 2;
}

/// [1, v_1, ..., v_m]
inline RealVector linear_features(const std::vector<double>& values) {
  RealVector out(values.size() + 1);
  out(0) = 1.0;
  for (size_t i = 0; i < values.size(); ++i) out(i + 1) = values[i];
  return out;
}

/// [1, v_1..v_m, v_a v_b for a <= b in lexicographic (a, b) order].
/// The fixed ordering pins the meaning of every weight index.
inline RealVector poly_features(const std::vector<double>& values) {
  const int m = static_cast<int>(values.size());
  RealVector out(1 + m + m * (m + 1) / 2);
  out(0) = 1.0;
  int pos = 1;
  for (int i = 0; i < m; ++i) out(pos++) = values[i];
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) out(pos++) = values[a] * values[b];
  }
  return out;
}

inline RealVector make_features(const std::vector<double>& values,
                                RegressionMode mode) {
  return mode == RegressionMode::linear ? linear_features(values)
                                        : poly_features(values);
}

/// Names aligned with the entries of make_features over the given observable
/// names (used for weight-file headers).
inline std::vector<std::string> feature_names(
    const std::vector<std::string>& observable_names, RegressionMode mode) {
  std::vector<std::string> names{"bias"};
  for (const auto& n : observable_names) names.push_back(n);
  if (mode == RegressionMode::polynomial) {
    const int m = static_cast<int>(observable_names.size());
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        names.push_back(observable_names[a] + "*" + observable_names[b]);
      }
    }
  }
  return names;
}

}  // namespace qrc
