#pragma once

// Hamiltonian and loss operators of hard-core bosons with distance-R pair
// loss, and a number-sector-blocked Lindblad integrator.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "zeno/lattice.hpp"
#include "zeno/observables.hpp"
#include "zeno/ode.hpp"
#include "zeno/sector.hpp"

namespace zeno {

using cd = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cd, Eigen::RowMajor>;

struct ModelParams {
  LatticeSpec spec;
  double J = 1.0;
  double gamma = 0.0;
  double V = 0.0;
};

// Nearest-neighbour bonds (j, j+1); the wrap-around bond only when periodic.
std::vector<std::pair<int, int>> hopping_bonds(const LatticeSpec& spec);

// Matrix of H + H_nn on the codes of `sector`. Hops leading outside the code
// set are dropped, so a constrained code set yields the projected operator.
SparseMatrix build_hamiltonian(const ModelParams& params, const HilbertSector& sector);

// One operator per loss channel, mapping `from` (m bosons) to `to` (m-2).
std::vector<SparseMatrix> build_jump_operators(const ModelParams& params,
                                               const HilbertSector& from,
                                               const HilbertSector& to);

// Diagonal of sum_j L_j^dag L_j: gamma times the number of occupied channels.
std::vector<double> loss_rates(const ModelParams& params, const HilbertSector& sector);

struct StateVector {
  int n_sites = 0;
  std::vector<Code> codes;
  Eigen::VectorXcd amplitudes;

  static StateVector basis_state(const FockConfiguration& config);
  // Superposition sum_k coeffs[k] |configs[k]>, not normalized.
  static StateVector superposition(int n_sites, const std::vector<Code>& configs,
                                   const std::vector<cd>& coeffs);
  double norm() const { return amplitudes.norm(); }
  void normalize();
  cd amplitude(Code c) const;
  std::vector<double> site_densities() const;
};

struct DensityMatrix {
  int n_sites = 0;
  std::vector<Code> codes;
  Eigen::MatrixXcd matrix;

  static DensityMatrix pure(const StateVector& psi);
  cd trace() const { return matrix.trace(); }
  std::vector<double> site_densities() const;
};

// Read access to the state handed to observers. Blocks are column-major.
class MasterView {
 public:
  struct Block {
    const std::vector<Code>* rows;
    const std::vector<Code>* cols;
    const cd* data;
    bool mirrored;  // the adjoint block is implied (off-diagonal sector pair)
  };

  int n_sites = 0;
  const std::vector<Code>* pure_codes = nullptr;  // pure top sector, if any
  std::span<const cd> pure;
  std::vector<Block> blocks;

  double trace() const;
  double purity() const;
  std::vector<double> site_densities() const;
  // Tr(rho sigma+_i sigma-_j).
  cd one_body(int i, int j) const;
  DensityMatrix assemble() const;
};

struct MasterOptions {
  std::size_t dimension_cap = 5000;
  bool snapshots = false;
  OdeOptions ode;
  std::function<void(double t, const MasterView& view)> observer;
};

struct MasterResult {
  ObservableSeries series;
  std::vector<double> trace;
  std::vector<double> purity;
  std::vector<DensityMatrix> snapshots;
  OdeStats stats;
};

// Integrates the master equation with H, H_nn and the pair-loss dissipator.
// A pure initial state inside one number sector is propagated as a vector in
// that sector; lower sectors are density-matrix blocks.
MasterResult integrate_master(const ModelParams& params, const StateVector& psi0,
                              const std::vector<double>& t_grid, const MasterOptions& opts = {});
MasterResult integrate_master(const ModelParams& params, const DensityMatrix& rho0,
                              const std::vector<double>& t_grid, const MasterOptions& opts = {});

// Generic Lindblad equation on an explicit basis (mixed boson numbers allowed).
struct LindbladSystem {
  int n_sites = 0;
  HilbertSector basis;
  SparseMatrix H;
  std::vector<SparseMatrix> jumps;
};

// rho0 codes must all belong to the system basis.
MasterResult integrate_lindblad(const LindbladSystem& system, const DensityMatrix& rho0,
                                const std::vector<double>& t_grid,
                                const MasterOptions& opts = {});

// The same model as integrate_master written on the full Fock space of a
// small lattice (dense reference, N <= 10).
LindbladSystem full_fock_system(const ModelParams& params);

}  // namespace zeno
