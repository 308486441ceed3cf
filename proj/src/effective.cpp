#include "zeno/effective.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace zeno {

std::optional<Code> apply_term(const OperatorTerm& term, Code c, int n) {
  for (auto it = term.ops.rbegin(); it != term.ops.rend(); ++it) {
    const Code m = site_mask(n, it->site);
    if (it->raise) {
      if (c & m) return std::nullopt;
      c |= m;
    } else {
      if (!(c & m)) return std::nullopt;
      c &= ~m;
    }
  }
  return c;
}

SparseMatrix operator_matrix(const OperatorSum& op, const HilbertSector& from,
                             const HilbertSector& to) {
  std::vector<Eigen::Triplet<cd>> trip;
  for (std::size_t i = 0; i < from.size(); ++i) {
    for (const auto& term : op) {
      const auto out = apply_term(term, from.code(i), from.n_sites());
      if (!out) continue;
      const long k = to.index(*out);
      if (k >= 0) trip.emplace_back(static_cast<int>(k), static_cast<int>(i), cd(term.coeff, 0.0));
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(to.size()), static_cast<Eigen::Index>(from.size()));
  m.setFromTriplets(trip.begin(), trip.end());  // duplicates are summed
  m.prune(cd(0.0, 0.0), 0.0);
  return m;
}

namespace {

int wrap(const LatticeSpec& s, int j) { return ((j % s.n_sites) + s.n_sites) % s.n_sites; }

LadderOp lower(const LatticeSpec& s, int j) { return {wrap(s, j), false}; }
LadderOp raise(const LatticeSpec& s, int j) { return {wrap(s, j), true}; }

OperatorSum scaled(OperatorSum op, double f) {
  for (auto& t : op) t.coeff *= f;
  return op;
}

// sigma+_k times every term of op
OperatorSum raised(const LatticeSpec& s, int k, const OperatorSum& op) {
  OperatorSum out;
  for (const auto& t : op) {
    OperatorTerm u = t;
    u.ops.insert(u.ops.begin(), raise(s, k));
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

OperatorSum a_operator(const LatticeSpec& s, int j) {
  const int r = s.critical_distance;
  return {
      {1.0, {lower(s, j + r + 1), lower(s, j)}},
      {1.0, {lower(s, j + r - 1), lower(s, j)}},
      {1.0, {lower(s, j + r), lower(s, j + 1)}},
      {1.0, {lower(s, j + r), lower(s, j - 1)}},
  };
}

OperatorSum b_operator(const LatticeSpec& s, int j) {
  const int r = s.critical_distance;
  return {
      {1.0, {lower(s, j - r), lower(s, j - 1), lower(s, j + r)}},
      {1.0, {lower(s, j - r), lower(s, j + 1), lower(s, j + r)}},
  };
}

OperatorSum effective_jump_1(const LatticeSpec& s, int j, double Gamma) {
  const int r = s.critical_distance;
  OperatorSum op = a_operator(s, j);
  for (auto& t : raised(s, j - r, b_operator(s, j))) op.push_back({-t.coeff, t.ops});
  for (auto& t : raised(s, j + 2 * r, b_operator(s, j + r))) op.push_back({-t.coeff, t.ops});
  return scaled(std::move(op), std::sqrt(2.0 * Gamma));
}

OperatorSum effective_jump_2(const LatticeSpec& s, int j, double Gamma) {
  return scaled(b_operator(s, j), std::sqrt(Gamma));
}

LindbladSystem EffectiveModel::system() const {
  LindbladSystem s;
  s.n_sites = params.spec.n_sites;
  s.basis = basis;
  s.H = H_Z;
  s.jumps = jumps;
  return s;
}

EffectiveModel build_effective_model(const ModelParams& params, int max_bosons, int cap) {
  params.spec.validate();
  if (params.spec.boundary != Boundary::periodic)
    throw std::invalid_argument("effective operators are defined for periodic lattices");
  if (!(params.gamma > 0.0)) throw std::invalid_argument("effective model needs gamma > 0");
  const int n = params.spec.n_sites;
  if (n > cap) throw CapExceeded("effective model limited to " + std::to_string(cap) + " sites");
  EffectiveModel m;
  m.params = params;
  m.Gamma = 2.0 * params.J * params.J / params.gamma;
  std::vector<Code> codes;
  for (int b = 0; b <= std::min(max_bosons, n); ++b) {
    const auto sec = HilbertSector::zeno(params.spec, b);
    codes.insert(codes.end(), sec.codes().begin(), sec.codes().end());
  }
  m.basis = HilbertSector::from_codes(n, codes, true);
  m.H_Z = build_hamiltonian(params, m.basis);
  for (int j = 0; j < n; ++j) {
    m.jumps.push_back(operator_matrix(effective_jump_1(params.spec, j, m.Gamma), m.basis, m.basis));
    m.labels.push_back("L1[" + std::to_string(j) + "]");
  }
  for (int j = 0; j < n; ++j) {
    m.jumps.push_back(operator_matrix(effective_jump_2(params.spec, j, m.Gamma), m.basis, m.basis));
    m.labels.push_back("L2[" + std::to_string(j) + "]");
  }
  return m;
}

MasterResult integrate_effective(const EffectiveModel& model, const DensityMatrix& mu0,
                                 const std::vector<double>& t_grid, const MasterOptions& opts) {
  for (Code c : mu0.codes)
    if (!is_zeno_code(c, model.params.spec))
      throw std::invalid_argument("initial state is not supported on the Zeno subspace");
  const LindbladSystem sys = model.system();
  return integrate_lindblad(sys, mu0, t_grid, opts);
}

MasterResult integrate_effective(const EffectiveModel& model, const StateVector& mu0,
                                 const std::vector<double>& t_grid, const MasterOptions& opts) {
  return integrate_effective(model, DensityMatrix::pure(mu0), t_grid, opts);
}

HilbertSector reachable_zeno_component(const LatticeSpec& spec, const std::vector<Code>& seeds,
                                       std::size_t cap) {
  spec.validate();
  const int n = spec.n_sites;
  const auto bonds = hopping_bonds(spec);
  std::unordered_set<Code> seen;
  std::deque<Code> queue;
  for (Code c : seeds) {
    if (!is_zeno_code(c, spec)) throw std::invalid_argument("seed configuration is not Zeno");
    if (seen.insert(c).second) queue.push_back(c);
  }
  while (!queue.empty()) {
    const Code c = queue.front();
    queue.pop_front();
    for (auto [a, b] : bonds) {
      const Code ma = site_mask(n, a), mb = site_mask(n, b);
      if (((c & ma) != 0) == ((c & mb) != 0)) continue;
      const Code next = c ^ ma ^ mb;
      if (!is_zeno_code(next, spec) || !seen.insert(next).second) continue;
      if (seen.size() > cap) throw CapExceeded("reachable Zeno component exceeds the cap");
      queue.push_back(next);
    }
  }
  return HilbertSector::from_codes(n, std::vector<Code>(seen.begin(), seen.end()), true);
}

std::vector<StateVector> evolve_coherent(const ModelParams& params, const HilbertSector& basis,
                                         const StateVector& psi0, const std::vector<double>& t_grid,
                                         const OdeOptions& ode_opts) {
  const SparseMatrix h = build_hamiltonian(params, basis);
  std::vector<cd> y(basis.size(), cd{});
  for (std::size_t i = 0; i < psi0.codes.size(); ++i) {
    const long k = basis.index(psi0.codes[i]);
    const cd a = psi0.amplitudes[static_cast<Eigen::Index>(i)];
    if (k < 0) {
      if (a != cd{}) throw std::invalid_argument("initial state leaves the coherent basis");
      continue;
    }
    y[static_cast<std::size_t>(k)] += a;
  }
  DormandPrince<cd> ode(
      [&](double, std::span<const cd> x, std::span<cd> dx) {
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::Map<Eigen::VectorXcd> dv(dx.data(), static_cast<Eigen::Index>(dx.size()));
        dv.noalias() = cd(0.0, -1.0) * (h * xv);
      },
      ode_opts);
  std::vector<StateVector> out;
  double t = 0.0;
  for (double target : t_grid) {
    ode.advance(t, y, target);
    StateVector s;
    s.n_sites = basis.n_sites();
    s.codes = basis.codes();
    s.amplitudes = Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<Eigen::Index>(y.size()));
    out.push_back(std::move(s));
  }
  return out;
}

PairClass classify_pairs(Code c, const LatticeSpec& spec) {
  const int n = spec.n_sites;
  std::vector<std::pair<int, int>> pairs;
  for (auto [a, b] : spec.loss_channels())
    if ((c & site_mask(n, a)) && (c & site_mask(n, b))) pairs.emplace_back(a, b);
  if (pairs.empty()) return PairClass::zeno;
  if (pairs.size() == 1) return PairClass::single_pair;
  if (pairs.size() == 2) {
    const auto [a1, b1] = pairs[0];
    const auto [a2, b2] = pairs[1];
    const bool distinct = !(a1 == a2 && b1 == b2) && !(a1 == b2 && b1 == a2);
    if (distinct && (b1 == a2 || b2 == a1)) return PairClass::shared_double;
  }
  return PairClass::other;
}

Eigen::VectorXd pair_projector(const LatticeSpec& spec, PairClass cls) {
  spec.validate();
  if (spec.n_sites > 12) throw CapExceeded("pair projectors limited to 12 sites");
  const std::size_t dim = std::size_t{1} << spec.n_sites;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c)
    if (classify_pairs(static_cast<Code>(c), spec) == cls) q[static_cast<Eigen::Index>(c)] = 1.0;
  return q;
}

std::vector<DissipatorCheck> verify_dissipator_spectrum(
    const ModelParams& params, const std::vector<std::pair<Code, Code>>& samples) {
  const auto& spec = params.spec;
  spec.validate();
  if (spec.n_sites > 12) throw CapExceeded("dissipator check limited to 12 sites");
  const int n = spec.n_sites;
  std::vector<Code> all(std::size_t{1} << n);
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<Code>(c);
  const auto basis = HilbertSector::from_codes(n, all, true);
  const auto jumps = build_jump_operators(params, basis, basis);
  const auto d = static_cast<Eigen::Index>(basis.size());
  SparseMatrix k(d, d);
  for (const auto& l : jumps) {
    SparseMatrix ll = SparseMatrix(l.adjoint()) * l;
    k += ll;
  }

  std::vector<DissipatorCheck> out;
  for (auto [s, p] : samples) {
    if (!is_zeno_code(s, spec)) throw std::invalid_argument("dissipator samples need a Zeno ket");
    Eigen::VectorXcd es = Eigen::VectorXcd::Zero(d), ep = Eigen::VectorXcd::Zero(d);
    es[static_cast<Eigen::Index>(s)] = 1.0;
    ep[static_cast<Eigen::Index>(p)] = 1.0;
    // L_d(|s><p|) accumulated entrywise
    std::map<std::pair<Eigen::Index, Eigen::Index>, cd> x;
    for (const auto& l : jumps) {
      const Eigen::VectorXcd ls = l * es, lp = l * ep;
      std::vector<Eigen::Index> nz_s, nz_p;
      for (Eigen::Index a = 0; a < d; ++a) {
        if (ls[a] != cd{}) nz_s.push_back(a);
        if (lp[a] != cd{}) nz_p.push_back(a);
      }
      for (Eigen::Index a : nz_s)
        for (Eigen::Index b : nz_p) x[{a, b}] += ls[a] * std::conj(lp[b]);
    }
    const Eigen::VectorXcd ks = k * es, kp = k * ep;
    for (Eigen::Index a = 0; a < d; ++a)
      if (ks[a] != cd{}) x[{a, static_cast<Eigen::Index>(p)}] -= 0.5 * ks[a];
    for (Eigen::Index b = 0; b < d; ++b)
      if (kp[b] != cd{}) x[{static_cast<Eigen::Index>(s), b}] -= 0.5 * std::conj(kp[b]);

    DissipatorCheck chk;
    chk.s = s;
    chk.p = p;
    chk.p_class = classify_pairs(p, spec);
    switch (chk.p_class) {
      case PairClass::zeno: chk.expected = 0.0; break;
      case PairClass::single_pair: chk.expected = -0.5 * params.gamma; break;
      case PairClass::shared_double: chk.expected = -params.gamma; break;
      case PairClass::other: chk.expected = std::nan(""); break;
    }
    cd coherence = 0.0;
    double transfer = 0.0;
    for (const auto& [key, v] : x) {
      if (key.first == static_cast<Eigen::Index>(s) && key.second == static_cast<Eigen::Index>(p))
        coherence += v;
      else
        transfer += std::norm(v);
    }
    chk.measured = coherence.real();
    chk.residual = std::abs(coherence.real() - chk.expected) + std::abs(coherence.imag());
    chk.transfer = std::sqrt(transfer);
    out.push_back(chk);
  }
  return out;
}

std::vector<std::pair<Code, Code>> default_dissipator_samples(const LatticeSpec& spec) {
  const int n = spec.n_sites;
  const int r = spec.critical_distance;
  const Code s = site_mask(n, 0);
  auto at = [&](std::initializer_list<int> sites) {
    Code c = 0;
    for (int j : sites) c |= site_mask(n, spec.site(j) < 0 ? 0 : spec.site(j));
    return c;
  };
  // Candidate bras with the class they are meant to probe; lattices on which
  // a candidate lands in another class (e.g. N = 3R) skip it.
  const std::pair<Code, PairClass> candidates[] = {
      {at({1}), PairClass::zeno},
      {at({0, r}), PairClass::single_pair},
      {at({0, r, 2 * r}), PairClass::shared_double},
      {at({1, r + 1}), PairClass::single_pair},
  };
  std::vector<std::pair<Code, Code>> out;
  for (auto [p, cls] : candidates)
    if (classify_pairs(p, spec) == cls) out.emplace_back(s, p);
  return out;
}

}  // namespace zeno
