#include "zeno/flat_states.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace zeno {

double zeno_eigen_residual(const LatticeSpec& spec, const StateVector& psi, double* energy) {
  if (psi.codes.empty()) throw std::invalid_argument("empty state");
  const int m = std::popcount(psi.codes.front());
  const auto sector = HilbertSector::zeno(spec, m);
  const SparseMatrix h = build_hamiltonian({spec, 1.0, 0.0, 0.0}, sector);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sector.size()));
  for (std::size_t i = 0; i < psi.codes.size(); ++i) {
    const long k = sector.index(psi.codes[i]);
    if (k < 0) throw std::invalid_argument("state has weight outside the Zeno subspace");
    x[k] += psi.amplitudes[static_cast<Eigen::Index>(i)];
  }
  const Eigen::VectorXcd hx = h * x;
  const cd e = x.dot(hx) / x.squaredNorm();
  if (energy != nullptr) *energy = e.real();
  return (hx - e * x).norm();
}

namespace {

int place(const LatticeSpec& spec, int j) {
  const int s = spec.site(j);
  if (s < 0) throw std::invalid_argument("localized state does not fit on the open chain");
  return s;
}

Code sites_code(const LatticeSpec& spec, std::initializer_list<int> sites) {
  Code c = 0;
  for (int j : sites) {
    const Code m = site_mask(spec.n_sites, place(spec, j));
    if (c & m) throw std::invalid_argument("localized state wraps onto itself");
    c |= m;
  }
  return c;
}

void check(const LatticeSpec& spec, const StateVector& psi) {
  double e = 0.0;
  const double res = zeno_eigen_residual(spec, psi, &e);
  if (res > 1e-10 || std::abs(e) > 1e-10)
    throw NumericalError("localized state fails the eigenstate check (residual " +
                         std::to_string(res) + ", energy " + std::to_string(e) + ")");
}

}  // namespace

StateVector make_flat_state_I(const LatticeSpec& spec, int anchor) {
  spec.validate();
  const int r = spec.critical_distance;
  if (r % 2 != 0) throw std::invalid_argument("type I flat state needs an even R");
  std::vector<Code> codes;
  std::vector<cd> coeffs;
  const double norm = std::sqrt(2.0 / r);
  for (int l = 0; l < r / 2; ++l) {
    codes.push_back(sites_code(spec, {anchor + l, anchor + r - 1 - l}));
    coeffs.emplace_back((l % 2 == 0 ? -1.0 : 1.0) * norm, 0.0);
  }
  StateVector psi = StateVector::superposition(spec.n_sites, codes, coeffs);
  check(spec, psi);
  return psi;
}

StateVector make_flat_state_II(const LatticeSpec& spec, int anchor) {
  spec.validate();
  if (spec.critical_distance != 4) throw std::invalid_argument("type II flat state is defined for R = 4");
  const int j = anchor;
  const double h = 1.0 / std::sqrt(2.0);
  StateVector psi = StateVector::superposition(
      spec.n_sites, {sites_code(spec, {j, j + 3, j + 6, j + 9}), sites_code(spec, {j + 1, j + 3, j + 6, j + 8})},
      {cd(-h, 0.0), cd(h, 0.0)});
  check(spec, psi);
  return psi;
}

}  // namespace zeno
