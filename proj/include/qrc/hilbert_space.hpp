#pragma once

#include <stdexcept>
#include <string>

#include "qrc/types.hpp"

namespace qrc {

/// Composite Hilbert space of one truncated bosonic mode and a register of
/// two-level atoms.
///
/// Basis ordering: the Fock index varies slowest, then atom 1..N in order,
/// each atom in the (|g>, |e>) basis. The flat index of |n, s_1..s_N> is
/// n * 2^N + sum_i s_i * 2^(N-1-i) with s_i = 0 for |g> and 1 for |e>.
struct HilbertSpace {
  int n_fock = 0;  // photon truncation N_c, Fock states |0>..|N_c-1>
  int n_atom = 0;
  int dim = 0;     // n_fock * 2^n_atom

  int atom_states() const { return 1 << n_atom; }

  /// Fock index of a basis state.
  int fock_of(int index) const { return index >> n_atom; }

  /// 1 if atom i is excited in the given basis state, else 0.
  int atom_bit(int index, int atom) const {
    return (index >> (n_atom - 1 - atom)) & 1;
  }

  int index_of(int fock, int atom_bits) const {
    return (fock << n_atom) | atom_bits;
  }
};

/// Builds the composite space. The dimension cap guards against runaway
/// memory from miskeyed configurations; all supported experiments fit well
/// below it.
inline HilbertSpace build_space(int n_fock, int n_atom, int dim_cap = 4096) {
  if (n_fock < 2) throw std::invalid_argument("build_space: n_fock must be >= 2");
  if (n_atom < 0) throw std::invalid_argument("build_space: n_atom must be >= 0");
  if (n_atom > 20) throw std::invalid_argument("build_space: n_atom too large");
  long long dim = static_cast<long long>(n_fock) << n_atom;
  if (dim > dim_cap) {
    throw std::invalid_argument("build_space: dimension " + std::to_string(dim) +
                                " exceeds cap " + std::to_string(dim_cap));
  }
  return HilbertSpace{n_fock, n_atom, static_cast<int>(dim)};
}

}  // namespace qrc
