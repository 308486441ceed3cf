#pragma once

// Zeno-subspace dynamics: projected Hamiltonian, second-order loss
// operators, pair-structure projectors and dissipator checks.

#include <optional>
#include <string>
#include <vector>

#include "zeno/lindblad.hpp"

namespace zeno {

// Products of ladder operators, applied right to left.
struct LadderOp {
  int site;
  bool raise;
};
struct OperatorTerm {
  double coeff = 1.0;
  std::vector<LadderOp> ops;
};
using OperatorSum = std::vector<OperatorTerm>;

// Result of one product on a configuration, or nullopt when annihilated.
std::optional<Code> apply_term(const OperatorTerm& term, Code c, int n_sites);

// Matrix of `op` between code sets; components outside `to` are dropped.
SparseMatrix operator_matrix(const OperatorSum& op, const HilbertSector& from,
                             const HilbertSector& to);

// A_j, B_j and the effective jump operators, periodic indices.
OperatorSum a_operator(const LatticeSpec& spec, int j);
OperatorSum b_operator(const LatticeSpec& spec, int j);
OperatorSum effective_jump_1(const LatticeSpec& spec, int j, double Gamma);
OperatorSum effective_jump_2(const LatticeSpec& spec, int j, double Gamma);

struct EffectiveModel {
  ModelParams params;
  double Gamma = 0.0;          // 2 J^2 / gamma
  HilbertSector basis;         // Zeno configurations with 0..max_bosons bosons
  SparseMatrix H_Z;
  std::vector<SparseMatrix> jumps;
  std::vector<std::string> labels;  // "L1[j]" / "L2[j]"

  LindbladSystem system() const;
};

EffectiveModel build_effective_model(const ModelParams& params, int max_bosons,
                                     int cap = kEnumerationCap);

MasterResult integrate_effective(const EffectiveModel& model, const DensityMatrix& mu0,
                                 const std::vector<double>& t_grid,
                                 const MasterOptions& opts = {});
MasterResult integrate_effective(const EffectiveModel& model, const StateVector& mu0,
                                 const std::vector<double>& t_grid,
                                 const MasterOptions& opts = {});

// Zeno configurations connected to `seeds` by constrained single hops.
HilbertSector reachable_zeno_component(const LatticeSpec& spec, const std::vector<Code>& seeds,
                                       std::size_t cap = 2'000'000);

// Schroedinger evolution under H_Z on `basis`; psi0 must be supported on it.
// Returns the state at each grid time.
std::vector<StateVector> evolve_coherent(const ModelParams& params, const HilbertSector& basis,
                                         const StateVector& psi0,
                                         const std::vector<double>& t_grid,
                                         const OdeOptions& ode = {});

enum class PairClass { zeno, single_pair, shared_double, other };
PairClass classify_pairs(Code c, const LatticeSpec& spec);

// Diagonal 0/1 projector over all 2^N configurations (N <= 12).
Eigen::VectorXd pair_projector(const LatticeSpec& spec, PairClass cls);

struct DissipatorCheck {
  Code s = 0, p = 0;
  PairClass p_class = PairClass::zeno;
  double expected = 0.0;  // coherence eigenvalue
  double measured = 0.0;
  double residual = 0.0;   // |measured - expected| plus any imaginary part
  double transfer = 0.0;   // norm of the part of L_d(|s><p|) away from |s><p|
};

// Applies the bare dissipator to |s><p| for each sample (s must be Zeno).
std::vector<DissipatorCheck> verify_dissipator_spectrum(
    const ModelParams& params, const std::vector<std::pair<Code, Code>>& samples);

// Zeno ket with one boson at site 0 against bras of every class that exists
// on the lattice.
std::vector<std::pair<Code, Code>> default_dissipator_samples(const LatticeSpec& spec);

}  // namespace zeno
