#pragma once

#include <complex>
#include <Eigen/Dense>

namespace qrc {

using Complex = std::complex<double>;

// Dense complex operator/state matrix. Row-major so that rows are contiguous
// for the evolution kernels.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;

using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

}  // namespace qrc
