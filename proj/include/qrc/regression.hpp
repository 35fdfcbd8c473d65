#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "qrc/types.hpp"

namespace qrc {

inline constexpr double kDefaultRidgeDelta = 1e-10;

/// Ridge-regularized least squares:
///   W = (X^T X + delta I)^(-1) X^T y,
/// solved through a Cholesky factorization of the regularized normal matrix
/// rather than an explicit pseudoinverse.
inline RealVector train_ridge(const RealMatrix& x, const RealVector& y_target,
                              double delta = kDefaultRidgeDelta) {
  if (x.rows() != y_target.size()) {
    throw std::invalid_argument("train_ridge: X rows != target length");
  }
  if (delta <= 0.0) {
    throw std::invalid_argument("train_ridge: delta must be > 0");
  }
  if (x.rows() < x.cols()) {
    std::cerr << "train_ridge: warning: " << x.rows() << " samples for "
              << x.cols() << " weights (underdetermined fit)\n";
  }
  Eigen::MatrixXd normal = Eigen::MatrixXd(x.transpose() * x);
  normal.diagonal().array() += delta;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "train_ridge: normal matrix not positive definite at working "
        "precision");
  }
  RealVector w = llt.solve(Eigen::VectorXd(x.transpose() * y_target));
  if (!w.allFinite()) {
    throw std::runtime_error("train_ridge: non-finite weights");
  }
  return w;
}

/// y_k = sum_n X_kn W_n
inline RealVector predict(const RealMatrix& x, const RealVector& w) {
  if (x.cols() != w.size()) {
    throw std::invalid_argument("predict: X columns != weight length");
  }
  return x * w;
}

/// Root mean square error normalized by the target's range:
///   NRMSE = sqrt(sum_k (y_k - t_k)^2 / L) / (t_max - t_min).
/// The extrema are taken over the targets of the zone being scored.
inline double nrmse(const RealVector& y, const RealVector& y_target) {
  if (y.size() != y_target.size()) {
    throw std::invalid_argument("nrmse: length mismatch");
  }
  if (y.size() < 2) throw std::invalid_argument("nrmse: need at least 2 points");
  double t_max = y_target.maxCoeff();
  double t_min = y_target.minCoeff();
  if (t_max <= t_min) {
    throw std::invalid_argument("nrmse: constant target has zero range");
  }
  double mse = (y - y_target).squaredNorm() / y.size();
  return std::sqrt(mse) / (t_max - t_min);
}

/// Plain-text weight serialization: one "index <tab> name <tab> value" row
/// per feature.
inline void save_weights(const std::string& path, const RealVector& w,
                         const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != w.size()) {
    throw std::invalid_argument("save_weights: names/weights length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights: cannot open " + path);
  out << "index\tfeature\tweight\n";
  out.precision(17);
  for (int i = 0; i < w.size(); ++i) {
    out << i << '\t' << names[i] << '\t' << w(i) << '\n';
  }
}

inline RealVector load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_weights: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::vector<double> vals;
  int index;
  std::string name;
  double value;
  while (in >> index >> name >> value) vals.push_back(value);
  RealVector w(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) w(i) = vals[i];
  return w;
}

}  // namespace qrc
