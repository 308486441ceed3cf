#include "zeno/bands.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "zeno/effective.hpp"
#include "zeno/lindblad.hpp"

namespace zeno {

int InternalBasis::max_extent() const {
  int e = 0;
  for (const auto& s : states) e = std::max(e, s.back());
  return e;
}

namespace {

bool zeno_offsets(const std::vector<int>& off, int r) {
  for (std::size_t a = 0; a < off.size(); ++a)
    for (std::size_t b = a + 1; b < off.size(); ++b)
      if (off[b] - off[a] == r) return false;
  return true;
}

int adjacent_pairs(const std::vector<int>& off) {
  int c = 0;
  for (std::size_t a = 0; a + 1 < off.size(); ++a)
    if (off[a + 1] - off[a] == 1) ++c;
  return c;
}

}  // namespace

InternalBasis enumerate_internal_states(int R, int m, KindRequest kind, std::size_t cap) {
  if (R < 1) throw std::invalid_argument("critical distance must be >= 1");
  if (m < 1) throw std::invalid_argument("complex needs at least one boson");
  if (kind == KindRequest::automatic)
    kind = (m <= R) ? KindRequest::type_one : KindRequest::type_two;
  std::vector<int> seed(static_cast<std::size_t>(m));
  const int spacing = (kind == KindRequest::type_one || m == 1) ? 1 : R - 1;
  if (spacing < 1) throw std::invalid_argument("no type II complex for R = 1");
  for (int i = 0; i < m; ++i) seed[static_cast<std::size_t>(i)] = i * spacing;
  if (!zeno_offsets(seed, R))
    throw std::invalid_argument("seed complex violates the Zeno constraint");

  InternalBasis basis;
  basis.R = R;
  basis.m = m;
  basis.kind = complex_kind(seed, R);
  const ComplexKind want = m == 1 ? ComplexKind::free
                                  : (kind == KindRequest::type_one ? ComplexKind::type_one
                                                                   : ComplexKind::type_two);
  if (basis.kind != want) throw std::invalid_argument("seed complex has the wrong kind");

  std::map<std::vector<int>, int> index;
  std::deque<std::vector<int>> queue;
  index[seed] = 0;
  basis.states.push_back(seed);
  queue.push_back(seed);
  const int extent_limit = 4 * m * R;
  while (!queue.empty()) {
    const std::vector<int> cur = queue.front();
    queue.pop_front();
    const int from = index.at(cur);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (int d : {-1, 1}) {
        std::vector<int> next = cur;
        next[i] += d;
        if (std::find(cur.begin(), cur.end(), next[i]) != cur.end()) continue;
        std::sort(next.begin(), next.end());
        if (!zeno_offsets(next, R)) continue;
        const int shift = next.front();
        for (int& o : next) o -= shift;
        if (next.back() > extent_limit)
          throw CapExceeded("internal-state closure diverges: the seed is not a bound complex");
        auto [it, inserted] = index.try_emplace(next, static_cast<int>(basis.states.size()));
        if (inserted) {
          if (basis.states.size() >= cap) throw CapExceeded("internal basis exceeds the size cap");
          basis.states.push_back(next);
          queue.push_back(next);
        }
        basis.hops.push_back({from, it->second, shift});
      }
    }
  }
  for (const auto& s : basis.states)
    if (s.size() > 1 && complex_kind(s, R) != basis.kind)
      throw std::logic_error("internal closure changed the complex kind");
  return basis;
}

BlochMatrix::BlochMatrix(InternalBasis basis, double J, double V)
    : basis_(std::move(basis)), J_(J), V_(V) {
  for (const auto& s : basis_.states) diagonal_.push_back(V_ * adjacent_pairs(s));
}

Eigen::MatrixXcd BlochMatrix::at(double q) const {
  const Eigen::Index d = dimension();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& hop : basis_.hops)
    h(hop.to, hop.from) += J_ * std::polar(1.0, -hop.shift * q);
  for (Eigen::Index i = 0; i < d; ++i) h(i, i) += diagonal_[static_cast<std::size_t>(i)];
  return h;
}

BlochMatrix build_bloch_matrix(const InternalBasis& basis, double J, double V) {
  return BlochMatrix(basis, J, V);
}

BandStructure compute_bands(const BlochMatrix& bloch, int q_points, double flat_tol) {
  if (q_points < 2) throw std::invalid_argument("need at least two q points");
  const Eigen::Index d = bloch.dimension();
  const auto nb = static_cast<std::size_t>(d);
  const auto nq = static_cast<std::size_t>(q_points);
  const double scale = std::max(std::abs(bloch.J()), 1e-300);
  BandStructure out;
  out.bands.assign(nb, std::vector<double>(nq));
  out.tracked.assign(nb, std::vector<double>(nq));
  Eigen::MatrixXcd ref;           // reference eigenvectors, tracked order
  std::vector<int> order(nb);     // tracked band -> sorted index at the current q
  for (std::size_t k = 0; k < nq; ++k) {
    const double q = 2.0 * std::numbers::pi * static_cast<double>(k) / q_points;
    out.q_grid.push_back(q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bloch.at(q));
    const Eigen::VectorXd& ev = es.eigenvalues();
    for (std::size_t b = 0; b < nb; ++b) out.bands[b][k] = ev[static_cast<Eigen::Index>(b)];
    if (k == 0) {
      ref = es.eigenvectors();
      for (std::size_t b = 0; b < nb; ++b) order[b] = static_cast<int>(b);
    } else {
      // Greedy assignment by largest overlap with the reference vectors.
      const Eigen::MatrixXd ov = (ref.adjoint() * es.eigenvectors()).cwiseAbs();
      std::vector<bool> used_t(nb, false), used_s(nb, false);
      for (std::size_t round = 0; round < nb; ++round) {
        double best = -1.0;
        std::size_t bt = 0, bs = 0;
        for (std::size_t t = 0; t < nb; ++t) {
          if (used_t[t]) continue;
          for (std::size_t s = 0; s < nb; ++s)
            if (!used_s[s] && ov(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) > best) {
              best = ov(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s));
              bt = t;
              bs = s;
            }
        }
        used_t[bt] = used_s[bs] = true;
        order[bt] = static_cast<int>(bs);
      }
      // Refresh references only where the eigenvalue is isolated, so that
      // the arbitrary basis inside a degenerate point is not inherited.
      for (std::size_t t = 0; t < nb; ++t) {
        const auto s = static_cast<Eigen::Index>(order[t]);
        bool isolated = true;
        if (s > 0 && ev[s] - ev[s - 1] < 1e-6 * scale) isolated = false;
        if (s + 1 < d && ev[s + 1] - ev[s] < 1e-6 * scale) isolated = false;
        if (isolated) ref.col(static_cast<Eigen::Index>(t)) = es.eigenvectors().col(s);
      }
    }
    for (std::size_t t = 0; t < nb; ++t) out.tracked[t][k] = ev[order[t]];
    for (Eigen::Index b = 0; b + 1 < d; ++b)
      if (ev[b + 1] - ev[b] < flat_tol * scale)
        out.crossings.push_back({q, static_cast<int>(b), static_cast<int>(b + 1)});
  }
  for (std::size_t b = 0; b < nb; ++b) {
    const auto [lo, hi] = std::minmax_element(out.bands[b].begin(), out.bands[b].end());
    out.flatness.push_back(*hi - *lo);
    out.flat_flags.push_back(*hi - *lo < flat_tol * scale);
  }
  return out;
}

std::vector<FlatScanRow> scan_flat_bands(const std::vector<int>& m_values,
                                         const std::vector<int>& R_values, KindRequest kind,
                                         int q_points) {
  std::vector<FlatScanRow> rows;
  for (int m : m_values) {
    for (int r : R_values) {
      FlatScanRow row;
      row.m = m;
      row.R = r;
      InternalBasis basis;
      try {
        basis = enumerate_internal_states(r, m, kind);
      } catch (const std::invalid_argument&) {
        row.exists = false;
        rows.push_back(row);
        continue;
      }
      row.kind = basis.kind;
      row.basis_size = basis.states.size();
      const auto bands = compute_bands(build_bloch_matrix(basis, 1.0, 0.0), q_points);
      row.min_flatness = *std::min_element(bands.flatness.begin(), bands.flatness.end());
      row.has_flat = std::any_of(bands.flat_flags.begin(), bands.flat_flags.end(), [](bool f) { return f; });
      rows.push_back(row);
    }
  }
  return rows;
}

Deformation interaction_deformation(const InternalBasis& basis, double J, double V, int q_points) {
  Deformation d;
  d.bare = compute_bands(build_bloch_matrix(basis, J, 0.0), q_points);
  d.interacting = compute_bands(build_bloch_matrix(basis, J, V), q_points);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  d.gap_at_crossing = nan;
  for (const auto& c : d.bare.crossings) {
    const auto k = static_cast<std::size_t>(
        std::lround(c.q / (2.0 * std::numbers::pi) * q_points));
    const double gap = d.interacting.bands[static_cast<std::size_t>(c.upper)][k] -
                       d.interacting.bands[static_cast<std::size_t>(c.lower)][k];
    d.gap_at_crossing = std::isnan(d.gap_at_crossing) ? gap : std::min(d.gap_at_crossing, gap);
  }
  d.flatness = nan;
  for (std::size_t b = 0; b < d.bare.flat_flags.size(); ++b)
    if (d.bare.flat_flags[b])
      d.flatness = std::isnan(d.flatness) ? d.interacting.flatness[b]
                                          : std::max(d.flatness, d.interacting.flatness[b]);
  for (std::size_t b = 0; b < d.bare.bands.size(); ++b)
    for (std::size_t k = 0; k < d.bare.q_grid.size(); ++k)
      d.max_shift = std::max(d.max_shift, std::abs(d.interacting.bands[b][k] - d.bare.bands[b][k]));
  return d;
}

RingOracleReport bloch_vs_ring_oracle(const InternalBasis& basis, int n_sites, double J, double V,
                                      double tol) {
  RingOracleReport rep;
  rep.n_sites = n_sites;
  rep.expected_dimension = static_cast<std::size_t>(n_sites) * basis.states.size();
  const LatticeSpec spec{n_sites, basis.R, Boundary::periodic};
  spec.validate();
  // Every translate of every internal state; frozen complexes reach nothing
  // from a single seed. Translates that wrap into a loss pair are left out,
  // which shows up as a dimension mismatch.
  std::vector<Code> seeds;
  for (const auto& st : basis.states) {
    if (st.back() >= n_sites) throw std::invalid_argument("complex does not fit on the ring");
    for (int a = 0; a < n_sites; ++a) {
      Code c = 0;
      for (int o : st) c |= site_mask(n_sites, (a + o) % n_sites);
      if (is_zeno_code(c, spec)) seeds.push_back(c);
    }
  }
  if (seeds.empty()) {
    rep.max_residual = std::numeric_limits<double>::infinity();
    return rep;
  }
  const HilbertSector ring = reachable_zeno_component(spec, seeds);
  rep.ring_dimension = ring.size();
  const SparseMatrix h = build_hamiltonian({spec, J, 0.0, V}, ring);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h)};
  std::vector<double> ring_ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());

  const BlochMatrix bloch(basis, J, V);
  std::vector<double> bloch_ev;
  for (int k = 0; k < n_sites; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> bs(bloch.at(2.0 * std::numbers::pi * k / n_sites),
                                                       Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < bs.eigenvalues().size(); ++i) bloch_ev.push_back(bs.eigenvalues()[i]);
  }
  std::sort(bloch_ev.begin(), bloch_ev.end());
  if (ring_ev.size() != bloch_ev.size()) {
    rep.max_residual = std::numeric_limits<double>::infinity();
    return rep;
  }
  for (std::size_t i = 0; i < ring_ev.size(); ++i)
    rep.max_residual = std::max(rep.max_residual, std::abs(ring_ev[i] - bloch_ev[i]));
  rep.pass = rep.max_residual <= tol * std::abs(J);
  return rep;
}

}  // namespace zeno
