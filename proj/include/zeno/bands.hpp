#pragma once

// Bloch spectra of a single bound complex moving in the Zeno subspace.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "zeno/lattice.hpp"

namespace zeno {

enum class KindRequest { type_one, type_two, automatic };

struct InternalBasis {
  struct Hop {
    int from, to;
    int shift;  // displacement of the leftmost boson: -1, 0 or +1
  };
  int R = 0;
  int m = 0;
  ComplexKind kind = ComplexKind::free;
  std::vector<std::vector<int>> states;  // anchored offset lists
  std::vector<Hop> hops;
  int max_extent() const;
};

// Closure of a seed under constrained single hops, states kept anchored at
// the leftmost boson. Type I seeds are m adjacent bosons, type II seeds are
// spaced R-1 apart. Throws CapExceeded if the closure diverges.
InternalBasis enumerate_internal_states(int R, int m, KindRequest kind,
                                        std::size_t cap = 10000);

class BlochMatrix {
 public:
  BlochMatrix(InternalBasis basis, double J, double V);
  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(basis_.states.size()); }
  const InternalBasis& basis() const noexcept { return basis_; }
  double J() const noexcept { return J_; }
  // Hop beta -> alpha with anchor shift s contributes J e^{-i s q} to (alpha, beta).
  Eigen::MatrixXcd at(double q) const;

 private:
  InternalBasis basis_;
  double J_, V_;
  std::vector<double> diagonal_;
};

BlochMatrix build_bloch_matrix(const InternalBasis& basis, double J, double V = 0.0);

struct BandCrossing {
  double q;
  int lower, upper;  // indices into the sorted bands
};

struct BandStructure {
  std::vector<double> q_grid;                // 2 pi k / P, k = 0..P-1
  std::vector<std::vector<double>> bands;    // [band][q], ascending at each q
  std::vector<std::vector<double>> tracked;  // [band][q], continued by eigenvector overlap
  std::vector<bool> flat_flags;
  std::vector<double> flatness;              // max - min of each sorted band
  std::vector<BandCrossing> crossings;
};

BandStructure compute_bands(const BlochMatrix& bloch, int q_points, double flat_tol = 1e-8);

struct FlatScanRow {
  int m = 0, R = 0;
  ComplexKind kind = ComplexKind::free;
  std::size_t basis_size = 0;
  bool has_flat = false;
  double min_flatness = 0.0;
  bool exists = true;  // false when no bound complex of this kind exists
};

std::vector<FlatScanRow> scan_flat_bands(const std::vector<int>& m_values,
                                         const std::vector<int>& R_values, KindRequest kind,
                                         int q_points = 256);

struct Deformation {
  BandStructure bare, interacting;
  double gap_at_crossing = 0.0;     // smallest interacting gap at the bare crossings (NaN if none)
  double flatness = 0.0;            // largest interacting spread of a bare flat band (NaN if none)
  double max_shift = 0.0;           // max |interacting - bare| over sorted bands
};

Deformation interaction_deformation(const InternalBasis& basis, double J, double V, int q_points);

struct RingOracleReport {
  int n_sites = 0;
  std::size_t ring_dimension = 0;
  std::size_t expected_dimension = 0;  // N times the number of internal states
  double max_residual = 0.0;
  bool pass = false;
};

// Direct diagonalization of H_Z on the N-site ring, restricted to the
// configurations reachable from the complex, against the Bloch multiset.
RingOracleReport bloch_vs_ring_oracle(const InternalBasis& basis, int n_sites, double J,
                                      double V = 0.0, double tol = 1e-9);

}  // namespace zeno
