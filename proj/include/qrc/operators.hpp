#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrc/hilbert_space.hpp"
#include "qrc/types.hpp"

namespace qrc {

/// Truncated photon annihilation operator embedded in the full space:
/// <n-1, s| c |n, s> = sqrt(n).
inline ComplexMatrix annihilation_op(const HilbertSpace& space) {
  ComplexMatrix c = ComplexMatrix::Zero(space.dim, space.dim);
  for (int n = 1; n < space.n_fock; ++n) {
    for (int s = 0; s < space.atom_states(); ++s) {
      c(space.index_of(n - 1, s), space.index_of(n, s)) = std::sqrt(double(n));
    }
  }
  return c;
}

/// Lowering operator |g><e| of atom i, identity on every other factor.
inline ComplexMatrix atom_lowering_op(const HilbertSpace& space, int atom) {
  if (atom < 0 || atom >= space.n_atom) {
    throw std::out_of_range("atom_lowering_op: atom index out of range");
  }
  ComplexMatrix sigma = ComplexMatrix::Zero(space.dim, space.dim);
  int bit = 1 << (space.n_atom - 1 - atom);
  for (int idx = 0; idx < space.dim; ++idx) {
    if (idx & bit) sigma(idx & ~bit, idx) = 1.0;  // |..g..><..e..|
  }
  return sigma;
}

/// Projector onto the top retained Fock level; its expectation is the
/// truncation-tail population monitored during evolution.
inline ComplexMatrix top_fock_projector(const HilbertSpace& space) {
  ComplexMatrix p = ComplexMatrix::Zero(space.dim, space.dim);
  for (int s = 0; s < space.atom_states(); ++s) {
    int idx = space.index_of(space.n_fock - 1, s);
    p(idx, idx) = 1.0;
  }
  return p;
}

/// Drive-free Hamiltonian
///   H0 = omega_c c^dag c + sum_i omega_i sigma_i^dag sigma_i
///        + sum_i g_i (c^dag sigma_i + c sigma_i^dag).
inline ComplexMatrix build_h0(const HilbertSpace& space, double omega_c,
                              const std::vector<double>& omega,
                              const std::vector<double>& g) {
  if (static_cast<int>(omega.size()) != space.n_atom ||
      static_cast<int>(g.size()) != space.n_atom) {
    throw std::invalid_argument(
        "build_h0: omega/g list length must equal the atom count");
  }
  ComplexMatrix h = ComplexMatrix::Zero(space.dim, space.dim);
  for (int idx = 0; idx < space.dim; ++idx) {
    double diag = omega_c * space.fock_of(idx);
    for (int i = 0; i < space.n_atom; ++i) {
      diag += omega[i] * space.atom_bit(idx, i);
    }
    h(idx, idx) = diag;
  }
  for (int i = 0; i < space.n_atom; ++i) {
    int bit = 1 << (space.n_atom - 1 - i);
    for (int n = 1; n < space.n_fock; ++n) {
      for (int s = 0; s < space.atom_states(); ++s) {
        if (s & bit) {
          // <n, g_i| c^dag sigma_i |n-1, e_i> = sqrt(n)
          int col = space.index_of(n - 1, s);
          int row = space.index_of(n, s & ~bit);
          double v = g[i] * std::sqrt(double(n));
          h(row, col) += v;
          h(col, row) += v;  // Hermitian partner c sigma^dag
        }
      }
    }
  }
  return h;
}

/// Drive operator D = i(c - c^dag); the time-dependent Hamiltonian is
/// H1(t) = epsilon f(t) D. Coincides with the P quadrature.
inline ComplexMatrix build_drive_op(const HilbertSpace& space) {
  ComplexMatrix c = annihilation_op(space);
  return kImag * (c - ComplexMatrix(c.adjoint()));
}

/// The full measured-observable family, in fixed order.
struct OperatorSet {
  ComplexMatrix c;                        // photon annihilation
  ComplexMatrix c_dag;
  std::vector<ComplexMatrix> sigma;       // per-atom lowering
  std::vector<ComplexMatrix> sigma_dag;
  ComplexMatrix q;                        // Q = c + c^dag
  ComplexMatrix p;                        // P = i(c - c^dag)
  std::vector<ComplexMatrix> sigma_x;     // sigma_i + sigma_i^dag
  std::vector<ComplexMatrix> sigma_y;     // i(sigma_i - sigma_i^dag)

  /// Observables ordered Q, P, sigma_x1, sigma_y1, sigma_x2, ...
  /// (length 2 n_atom + 2).
  std::vector<const ComplexMatrix*> observables() const {
    std::vector<const ComplexMatrix*> out;
    out.push_back(&q);
    out.push_back(&p);
    for (size_t i = 0; i < sigma_x.size(); ++i) {
      out.push_back(&sigma_x[i]);
      out.push_back(&sigma_y[i]);
    }
    return out;
  }

  static std::vector<std::string> observable_names(int n_atom) {
    std::vector<std::string> names{"Q", "P"};
    for (int i = 0; i < n_atom; ++i) {
      names.push_back("sx" + std::to_string(i + 1));
      names.push_back("sy" + std::to_string(i + 1));
    }
    return names;
  }
};

inline OperatorSet observable_set(const HilbertSpace& space) {
  OperatorSet ops;
  ops.c = annihilation_op(space);
  ops.c_dag = ops.c.adjoint();
  ops.q = ops.c + ops.c_dag;
  ops.p = kImag * (ops.c - ops.c_dag);
  for (int i = 0; i < space.n_atom; ++i) {
    ops.sigma.push_back(atom_lowering_op(space, i));
    ops.sigma_dag.push_back(ops.sigma.back().adjoint());
    ops.sigma_x.push_back(ops.sigma[i] + ops.sigma_dag[i]);
    ops.sigma_y.push_back(kImag * (ops.sigma[i] - ops.sigma_dag[i]));
  }
  return ops;
}

}  // namespace qrc
