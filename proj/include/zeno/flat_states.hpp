#pragma once

// Compactly supported zero-energy eigenstates of the projected Hamiltonian.

#include "zeno/lindblad.hpp"

namespace zeno {

// ||Q0 H Q0 psi - E psi|| with E = <psi|Q0 H Q0|psi>, hopping J = 1, V = 0.
double zeno_eigen_residual(const LatticeSpec& spec, const StateVector& psi, double* energy = nullptr);

// Two-boson flat-band state of an even-R complex anchored at `anchor`:
// sqrt(2/R) sum_{l<R/2} (-1)^{l+1} |anchor+l, anchor+R-1-l>.
// Throws NumericalError if the eigenstate check fails (> 1e-10).
StateVector make_flat_state_I(const LatticeSpec& spec, int anchor);

// Four-boson R = 4 state (-|j,j+3,j+6,j+9> + |j+1,j+3,j+6,j+8>)/sqrt(2).
StateVector make_flat_state_II(const LatticeSpec& spec, int anchor);

}  // namespace zeno
