#include "zeno/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "zeno/kernels.hpp"

namespace zeno {

using Triplet = Eigen::Triplet<cd>;

std::vector<std::pair<int, int>> hopping_bonds(const LatticeSpec& spec) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j + 1 < spec.n_sites; ++j) out.emplace_back(j, j + 1);
  if (spec.boundary == Boundary::periodic && spec.n_sites > 1) out.emplace_back(spec.n_sites - 1, 0);
  return out;
}

SparseMatrix build_hamiltonian(const ModelParams& p, const HilbertSector& sector) {
  const int n = p.spec.n_sites;
  if (sector.n_sites() != n) throw std::invalid_argument("sector and lattice size differ");
  const auto bonds = hopping_bonds(p.spec);
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < sector.size(); ++i) {
    const Code c = sector.code(i);
    int adjacent = 0;
    for (auto [a, b] : bonds) {
      const Code ma = site_mask(n, a), mb = site_mask(n, b);
      const bool oa = c & ma, ob = c & mb;
      if (oa && ob) {
        ++adjacent;
      } else if (oa != ob) {
        const long k = sector.index(c ^ ma ^ mb);
        if (k >= 0) trip.emplace_back(static_cast<int>(k), static_cast<int>(i), cd(p.J, 0.0));
      }
    }
    if (p.V != 0.0 && adjacent > 0)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), cd(p.V * adjacent, 0.0));
  }
  const auto d = static_cast<Eigen::Index>(sector.size());
  SparseMatrix h(d, d);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

std::vector<SparseMatrix> build_jump_operators(const ModelParams& p, const HilbertSector& from,
                                               const HilbertSector& to) {
  const int n = p.spec.n_sites;
  const double amp = std::sqrt(p.gamma);
  std::vector<SparseMatrix> out;
  for (auto [a, b] : p.spec.loss_channels()) {
    const Code mask = site_mask(n, a) | site_mask(n, b);
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < from.size(); ++i) {
      const Code c = from.code(i);
      if ((c & mask) != mask) continue;
      const long k = to.index(c & ~mask);
      if (k >= 0) trip.emplace_back(static_cast<int>(k), static_cast<int>(i), cd(amp, 0.0));
    }
    SparseMatrix l(static_cast<Eigen::Index>(to.size()), static_cast<Eigen::Index>(from.size()));
    l.setFromTriplets(trip.begin(), trip.end());
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<double> loss_rates(const ModelParams& p, const HilbertSector& sector) {
  const int n = p.spec.n_sites;
  const auto channels = p.spec.loss_channels();
  std::vector<double> k(sector.size(), 0.0);
  for (std::size_t i = 0; i < sector.size(); ++i) {
    const Code c = sector.code(i);
    int active = 0;
    for (auto [a, b] : channels) {
      const Code mask = site_mask(n, a) | site_mask(n, b);
      if ((c & mask) == mask) ++active;
    }
    k[i] = p.gamma * active;
  }
  return k;
}

// ---------------------------------------------------------------------------

namespace {

void add_density(Code c, int n, double w, std::vector<double>& out) {
  while (c) {
    const int bit = std::countr_zero(c);
    out[static_cast<std::size_t>(n - 1 - bit)] += w;
    c &= c - 1;
  }
}

}  // namespace

StateVector StateVector::basis_state(const FockConfiguration& config) {
  StateVector s;
  s.n_sites = config.size();
  s.codes = {config.code()};
  s.amplitudes = Eigen::VectorXcd::Ones(1);
  return s;
}

StateVector StateVector::superposition(int n_sites, const std::vector<Code>& configs,
                                       const std::vector<cd>& coeffs) {
  if (configs.size() != coeffs.size()) throw std::invalid_argument("coefficient count mismatch");
  std::map<Code, cd> acc;
  for (std::size_t k = 0; k < configs.size(); ++k) acc[configs[k]] += coeffs[k];
  StateVector s;
  s.n_sites = n_sites;
  s.amplitudes.resize(static_cast<Eigen::Index>(acc.size()));
  Eigen::Index i = 0;
  for (const auto& [c, a] : acc) {
    s.codes.push_back(c);
    s.amplitudes[i++] = a;
  }
  return s;
}

void StateVector::normalize() {
  const double nrm = norm();
  if (nrm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  amplitudes /= nrm;
}

cd StateVector::amplitude(Code c) const {
  for (std::size_t i = 0; i < codes.size(); ++i)
    if (codes[i] == c) return amplitudes[static_cast<Eigen::Index>(i)];
  return 0.0;
}

std::vector<double> StateVector::site_densities() const {
  std::vector<double> out(static_cast<std::size_t>(n_sites), 0.0);
  for (std::size_t i = 0; i < codes.size(); ++i)
    add_density(codes[i], n_sites, std::norm(amplitudes[static_cast<Eigen::Index>(i)]), out);
  return out;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  DensityMatrix r;
  r.n_sites = psi.n_sites;
  r.codes = psi.codes;
  r.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  return r;
}

std::vector<double> DensityMatrix::site_densities() const {
  std::vector<double> out(static_cast<std::size_t>(n_sites), 0.0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    add_density(codes[i], n_sites, matrix(ii, ii).real(), out);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using MapC = Eigen::Map<const Eigen::MatrixXcd>;

long find_code(const std::vector<Code>& codes, Code c) {
  const auto it = std::lower_bound(codes.begin(), codes.end(), c);
  return (it == codes.end() || *it != c) ? -1 : static_cast<long>(it - codes.begin());
}

}  // namespace

double MasterView::trace() const {
  double t = 0.0;
  for (const cd& a : pure) t += std::norm(a);
  for (const auto& b : blocks) {
    if (b.rows != b.cols) continue;
    const auto d = static_cast<Eigen::Index>(b.rows->size());
    t += MapC(b.data, d, d).trace().real();
  }
  return t;
}

double MasterView::purity() const {
  double p = 0.0;
  if (!pure.empty()) p += std::pow(kernels::sq_norm(pure), 2);
  for (const auto& b : blocks) {
    const auto r = static_cast<Eigen::Index>(b.rows->size());
    const auto c = static_cast<Eigen::Index>(b.cols->size());
    p += (b.mirrored ? 2.0 : 1.0) * MapC(b.data, r, c).squaredNorm();
  }
  return p;
}

std::vector<double> MasterView::site_densities() const {
  std::vector<double> out(static_cast<std::size_t>(n_sites), 0.0);
  if (pure_codes != nullptr)
    for (std::size_t i = 0; i < pure.size(); ++i) add_density((*pure_codes)[i], n_sites, std::norm(pure[i]), out);
  for (const auto& b : blocks) {
    if (b.rows != b.cols) continue;
    const auto d = static_cast<Eigen::Index>(b.rows->size());
    MapC x(b.data, d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      add_density((*b.rows)[static_cast<std::size_t>(i)], n_sites, x(i, i).real(), out);
  }
  return out;
}

cd MasterView::one_body(int i, int j) const {
  const Code mi = site_mask(n_sites, i), mj = site_mask(n_sites, j);
  // <O> = sum_t rho(t, O t) with O = sigma+_i sigma-_j.
  auto target = [&](Code t, Code& out) {
    if (i == j) {
      out = t;
      return (t & mi) != 0;
    }
    if (!(t & mj) || (t & mi)) return false;
    out = t ^ mi ^ mj;
    return true;
  };
  cd acc = 0.0;
  if (pure_codes != nullptr) {
    for (std::size_t k = 0; k < pure.size(); ++k) {
      Code s;
      if (!target((*pure_codes)[k], s)) continue;
      const long l = find_code(*pure_codes, s);
      if (l >= 0) acc += pure[k] * std::conj(pure[static_cast<std::size_t>(l)]);
    }
  }
  for (const auto& b : blocks) {
    if (b.rows != b.cols) continue;
    const auto d = static_cast<Eigen::Index>(b.rows->size());
    MapC x(b.data, d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      Code s;
      if (!target((*b.rows)[static_cast<std::size_t>(k)], s)) continue;
      const long l = find_code(*b.rows, s);
      if (l >= 0) acc += x(k, l);
    }
  }
  return acc;
}

DensityMatrix MasterView::assemble() const {
  std::vector<Code> all;
  if (pure_codes != nullptr) all.insert(all.end(), pure_codes->begin(), pure_codes->end());
  for (const auto& b : blocks)
    if (b.rows == b.cols) all.insert(all.end(), b.rows->begin(), b.rows->end());
  for (const auto& b : blocks) {
    all.insert(all.end(), b.rows->begin(), b.rows->end());
    all.insert(all.end(), b.cols->begin(), b.cols->end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  DensityMatrix r;
  r.n_sites = n_sites;
  r.codes = all;
  const auto d = static_cast<Eigen::Index>(all.size());
  r.matrix = Eigen::MatrixXcd::Zero(d, d);
  auto pos = [&](Code c) { return static_cast<Eigen::Index>(find_code(all, c)); };
  if (pure_codes != nullptr) {
    for (std::size_t a = 0; a < pure.size(); ++a)
      for (std::size_t b = 0; b < pure.size(); ++b)
        r.matrix(pos((*pure_codes)[a]), pos((*pure_codes)[b])) = pure[a] * std::conj(pure[b]);
  }
  for (const auto& blk : blocks) {
    const auto rr = static_cast<Eigen::Index>(blk.rows->size());
    const auto cc = static_cast<Eigen::Index>(blk.cols->size());
    MapC x(blk.data, rr, cc);
    for (Eigen::Index c = 0; c < cc; ++c)
      for (Eigen::Index q = 0; q < rr; ++q) {
        const auto pr = pos((*blk.rows)[static_cast<std::size_t>(q)]);
        const auto pc = pos((*blk.cols)[static_cast<std::size_t>(c)]);
        r.matrix(pr, pc) = x(q, c);
        if (blk.mirrored) r.matrix(pc, pr) = std::conj(x(q, c));
      }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sector-blocked engine.

namespace {

struct Sector {
  int m = 0;
  HilbertSector basis;
  SparseMatrix H;
  std::vector<double> half_loss;  // -K/2
  // Per loss channel: (index in sector m+2, index here) for every source
  // configuration holding that pair.
  std::vector<std::vector<std::pair<int, int>>> feed;
};

struct Block {
  int a = 0, b = 0;  // sector indices, a <= b
  std::size_t offset = 0;
  Eigen::Index rows = 0, cols = 0;
  int source = -1;  // block (a-1, b-1) in sector-index terms, i.e. two more bosons each
  bool source_is_pure = false;
};

class SectorEngine {
 public:
  SectorEngine(const ModelParams& p, const std::vector<int>& boson_numbers, std::size_t cap)
      : p_(p) {
    std::vector<int> ms;
    for (int m : boson_numbers)
      for (int k = m; k >= 0; k -= 2) ms.push_back(k);
    std::sort(ms.rbegin(), ms.rend());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    std::size_t total = 0;
    for (int m : ms) total += binomial(p.spec.n_sites, m);
    if (total > cap)
      throw CapExceeded("direct-sum dimension " + std::to_string(total) + " exceeds cap " +
                        std::to_string(cap));
    for (int m : ms) {
      Sector s;
      s.m = m;
      s.basis = HilbertSector::full(p.spec.n_sites, m);
      s.H = build_hamiltonian(p, s.basis);
      s.half_loss = loss_rates(p, s.basis);
      for (double& v : s.half_loss) v *= -0.5;
      sectors_.push_back(std::move(s));
    }
    const auto channels = p.spec.loss_channels();
    const int n = p.spec.n_sites;
    for (std::size_t i = 0; i < sectors_.size(); ++i) {
      const int up = sector_index(sectors_[i].m + 2);
      if (up < 0) continue;
      const auto& src = sectors_[static_cast<std::size_t>(up)].basis;
      auto& feed = sectors_[i].feed;
      feed.resize(channels.size());
      for (std::size_t c = 0; c < channels.size(); ++c) {
        const Code mask = site_mask(n, channels[c].first) | site_mask(n, channels[c].second);
        for (std::size_t k = 0; k < src.size(); ++k) {
          const Code code = src.code(k);
          if ((code & mask) != mask) continue;
          feed[c].emplace_back(static_cast<int>(k),
                               static_cast<int>(sectors_[i].basis.index(code & ~mask)));
        }
      }
    }
  }

  int sector_index(int m) const {
    for (std::size_t i = 0; i < sectors_.size(); ++i)
      if (sectors_[i].m == m) return static_cast<int>(i);
    return -1;
  }
  const Sector& sector(int i) const { return sectors_[static_cast<std::size_t>(i)]; }

  // Lays out the state: optional pure vector in sector `pure_sector`, then
  // the closure of `seed_blocks` under the jump map.
  void layout(int pure_sector, std::vector<std::pair<int, int>> seed_blocks) {
    pure_sector_ = pure_sector;
    std::size_t offset = 0;
    if (pure_sector >= 0) {
      pure_size_ = sector(pure_sector).basis.size();
      offset = pure_size_;
      const int below = sector_index(sector(pure_sector).m - 2);
      if (below >= 0) seed_blocks.emplace_back(below, below);
    }
    std::map<std::pair<int, int>, int> index;
    std::vector<std::pair<int, int>> queue = seed_blocks;
    while (!queue.empty()) {
      auto [a, b] = queue.back();
      queue.pop_back();
      if (a > b) std::swap(a, b);
      if (index.contains({a, b})) continue;
      index[{a, b}] = -1;
      const int a2 = sector_index(sector(a).m - 2), b2 = sector_index(sector(b).m - 2);
      if (a2 >= 0 && b2 >= 0) queue.emplace_back(a2, b2);
    }
    for (auto& [key, idx] : index) {
      Block blk;
      blk.a = key.first;
      blk.b = key.second;
      blk.rows = static_cast<Eigen::Index>(sector(blk.a).basis.size());
      blk.cols = static_cast<Eigen::Index>(sector(blk.b).basis.size());
      blk.offset = offset;
      offset += static_cast<std::size_t>(blk.rows * blk.cols);
      idx = static_cast<int>(blocks_.size());
      blocks_.push_back(blk);
    }
    for (auto& blk : blocks_) {
      const int a_up = sector_index(sector(blk.a).m + 2);
      const int b_up = sector_index(sector(blk.b).m + 2);
      if (a_up < 0 || b_up < 0) continue;
      const auto it = index.find({a_up, b_up});
      if (it != index.end())
        blk.source = it->second;
      else if (a_up == pure_sector_ && b_up == pure_sector_)
        blk.source_is_pure = true;
    }
    size_ = offset;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t pure_size() const noexcept { return pure_size_; }
  int pure_sector() const noexcept { return pure_sector_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  void rhs(std::span<const cd> y, std::span<cd> dy) const {
    const cd minus_i(0.0, -1.0);
    if (pure_sector_ >= 0) {
      const Sector& s = sector(pure_sector_);
      const auto d = static_cast<Eigen::Index>(pure_size_);
      Eigen::Map<const Eigen::VectorXcd> psi(y.data(), d);
      Eigen::Map<Eigen::VectorXcd> dpsi(dy.data(), d);
      dpsi.noalias() = minus_i * (s.H * psi);
      kernels::diag_axpy(0.0, s.half_loss, y.first(pure_size_), dy.first(pure_size_));
    }
    for (const Block& blk : blocks_) {
      const Sector& sa = sector(blk.a);
      const Sector& sb = sector(blk.b);
      MapC x(y.data() + blk.offset, blk.rows, blk.cols);
      Eigen::Map<Eigen::MatrixXcd> dx(dy.data() + blk.offset, blk.rows, blk.cols);
      dx.noalias() = sa.H * x;
      dx.noalias() -= x * sb.H;
      dx *= minus_i;
      for (Eigen::Index c = 0; c < blk.cols; ++c) {
        const auto col = static_cast<std::size_t>(c * blk.rows);
        const auto rows = static_cast<std::size_t>(blk.rows);
        kernels::active().diag_axpy(sb.half_loss[static_cast<std::size_t>(c)], sa.half_loss.data(),
                                    y.data() + blk.offset + col, dy.data() + blk.offset + col, rows);
      }
      add_jump_source(blk, y, dx);
    }
  }

  MasterView view(std::span<const cd> y) const {
    MasterView v;
    v.n_sites = p_.spec.n_sites;
    if (pure_sector_ >= 0) {
      v.pure_codes = &sector(pure_sector_).basis.codes();
      v.pure = y.first(pure_size_);
    }
    for (const Block& blk : blocks_)
      v.blocks.push_back({&sector(blk.a).basis.codes(), &sector(blk.b).basis.codes(),
                          y.data() + blk.offset, blk.a != blk.b});
    return v;
  }

 private:
  void add_jump_source(const Block& blk, std::span<const cd> y,
                       Eigen::Map<Eigen::MatrixXcd>& dx) const {
    if (p_.gamma == 0.0) return;
    const auto& feed_a = sector(blk.a).feed;
    const auto& feed_b = sector(blk.b).feed;
    if (feed_a.empty() || feed_b.empty()) return;
    const double g = p_.gamma;
    if (blk.source_is_pure) {
      const cd* psi = y.data();
      const auto d = static_cast<std::size_t>(blk.rows);
      std::vector<cd> v(d);
      for (std::size_t c = 0; c < feed_a.size(); ++c) {
        if (feed_a[c].empty()) continue;
        std::fill(v.begin(), v.end(), cd{});
        for (auto [src, dst] : feed_a[c]) v[static_cast<std::size_t>(dst)] += psi[src];
        // rank-one update g v v^dag
        for (std::size_t col = 0; col < d; ++col) {
          if (v[col] == cd{}) continue;
          const cd w = g * std::conj(v[col]);
          kernels::caxpy(w, v, std::span<cd>(dx.data() + col * d, d));
        }
      }
      return;
    }
    if (blk.source < 0) return;
    const Block& src = blocks_[static_cast<std::size_t>(blk.source)];
    MapC xs(y.data() + src.offset, src.rows, src.cols);
    for (std::size_t c = 0; c < feed_a.size(); ++c) {
      for (auto [sc, dc] : feed_b[c])
        for (auto [sr, dr] : feed_a[c]) dx(dr, dc) += g * xs(sr, sc);
    }
  }

  ModelParams p_;
  std::vector<Sector> sectors_;
  std::vector<Block> blocks_;
  int pure_sector_ = -1;
  std::size_t pure_size_ = 0;
  std::size_t size_ = 0;
};

template <class Engine>
MasterResult run_engine(const Engine& engine, std::vector<cd> y, const std::vector<double>& t_grid,
                        const MasterOptions& opts) {
  DormandPrince<cd> ode(
      [&](double, std::span<const cd> yy, std::span<cd> dy) { engine.rhs(yy, dy); }, opts.ode);
  MasterResult out;
  out.series.times = t_grid;
  double t = t_grid.empty() ? 0.0 : std::min(0.0, t_grid.front());
  for (double target : t_grid) {
    if (target < t) throw std::invalid_argument("time grid must be non-decreasing");
    ode.advance(t, y, target);
    const MasterView view = engine.view(y);
    const auto dens = view.site_densities();
    double total = 0.0;
    for (double d : dens) total += d;
    out.series.site_density.push_back(dens);
    out.series.total_density.push_back(dens.empty() ? 0.0 : total / static_cast<double>(dens.size()));
    out.trace.push_back(view.trace());
    out.purity.push_back(view.purity());
    if (!std::isfinite(out.trace.back()))
      throw NumericalError("non-finite state at t=" + std::to_string(target));
    if (opts.snapshots) out.snapshots.push_back(view.assemble());
    if (opts.observer) opts.observer(target, view);
  }
  out.stats = ode.stats();
  return out;
}

}  // namespace

MasterResult integrate_master(const ModelParams& p, const StateVector& psi0,
                              const std::vector<double>& t_grid, const MasterOptions& opts) {
  p.spec.validate();
  if (psi0.n_sites != p.spec.n_sites) throw std::invalid_argument("state and lattice size differ");
  if (psi0.codes.empty()) throw std::invalid_argument("empty initial state");
  const int m = std::popcount(psi0.codes.front());
  for (Code c : psi0.codes)
    if (std::popcount(c) != m) return integrate_master(p, DensityMatrix::pure(psi0), t_grid, opts);

  SectorEngine engine(p, {m}, opts.dimension_cap);
  const int top = engine.sector_index(m);
  engine.layout(top, {});
  std::vector<cd> y(engine.size(), cd{});
  const auto& basis = engine.sector(top).basis;
  for (std::size_t i = 0; i < psi0.codes.size(); ++i) {
    const long k = basis.index(psi0.codes[i]);
    if (k < 0) throw std::invalid_argument("initial code outside the lattice");
    y[static_cast<std::size_t>(k)] += psi0.amplitudes[static_cast<Eigen::Index>(i)];
  }
  return run_engine(engine, std::move(y), t_grid, opts);
}

MasterResult integrate_master(const ModelParams& p, const DensityMatrix& rho0,
                              const std::vector<double>& t_grid, const MasterOptions& opts) {
  p.spec.validate();
  if (rho0.n_sites != p.spec.n_sites) throw std::invalid_argument("state and lattice size differ");
  std::vector<int> ms;
  for (Code c : rho0.codes) ms.push_back(std::popcount(c));
  SectorEngine engine(p, ms, opts.dimension_cap);

  std::vector<std::pair<int, int>> seeds;
  const auto d = static_cast<Eigen::Index>(rho0.codes.size());
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      if (rho0.matrix(r, c) == cd{}) continue;
      int a = engine.sector_index(std::popcount(rho0.codes[static_cast<std::size_t>(r)]));
      int b = engine.sector_index(std::popcount(rho0.codes[static_cast<std::size_t>(c)]));
      seeds.emplace_back(std::min(a, b), std::max(a, b));
    }
  engine.layout(-1, seeds);
  std::vector<cd> y(engine.size(), cd{});
  for (const auto& blk : engine.blocks()) {
    const auto& rows = engine.sector(blk.a).basis;
    const auto& cols = engine.sector(blk.b).basis;
    for (Eigen::Index r = 0; r < d; ++r) {
      const long i = rows.index(rho0.codes[static_cast<std::size_t>(r)]);
      if (i < 0) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        const long j = cols.index(rho0.codes[static_cast<std::size_t>(c)]);
        if (j < 0) continue;
        y[blk.offset + static_cast<std::size_t>(j * blk.rows + i)] += rho0.matrix(r, c);
      }
    }
  }
  return run_engine(engine, std::move(y), t_grid, opts);
}

// ---------------------------------------------------------------------------
// Generic engine on one explicit basis.

namespace {

class DenseEngine {
 public:
  explicit DenseEngine(const LindbladSystem& s) : s_(s) {
    const auto d = static_cast<Eigen::Index>(s.basis.size());
    SparseMatrix k(d, d);
    for (const auto& l : s.jumps) {
      SparseMatrix ll = SparseMatrix(l.adjoint()) * l;
      k += ll;
    }
    drift_ = cd(0.0, -1.0) * s.H - 0.5 * k;
    jumps_adj_.reserve(s.jumps.size());
    for (const auto& l : s.jumps) jumps_adj_.emplace_back(l.adjoint());
  }

  void rhs(std::span<const cd> y, std::span<cd> dy) const {
    const auto d = static_cast<Eigen::Index>(s_.basis.size());
    MapC x(y.data(), d, d);
    Eigen::Map<Eigen::MatrixXcd> dx(dy.data(), d, d);
    // drift X + X drift^dag, written as Z + Z^dag for Hermitian X
    Eigen::MatrixXcd z = drift_ * x;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t j = 0; j < s_.jumps.size(); ++j) {
      Eigen::MatrixXcd lx = s_.jumps[j] * x;            // L X
      acc.noalias() += lx * jumps_adj_[j];               // L X L^dag
    }
    dx = z + z.adjoint() + 0.5 * (acc + acc.adjoint());
  }

  MasterView view(std::span<const cd> y) const {
    MasterView v;
    v.n_sites = s_.n_sites;
    v.blocks.push_back({&s_.basis.codes(), &s_.basis.codes(), y.data(), false});
    return v;
  }

 private:
  const LindbladSystem& s_;
  SparseMatrix drift_;
  std::vector<SparseMatrix> jumps_adj_;
};

}  // namespace

MasterResult integrate_lindblad(const LindbladSystem& system, const DensityMatrix& rho0,
                                const std::vector<double>& t_grid, const MasterOptions& opts) {
  const std::size_t d = system.basis.size();
  if (d > opts.dimension_cap)
    throw CapExceeded("basis dimension " + std::to_string(d) + " exceeds cap " +
                      std::to_string(opts.dimension_cap));
  std::vector<cd> y(d * d, cd{});
  std::vector<long> pos(rho0.codes.size());
  for (std::size_t i = 0; i < rho0.codes.size(); ++i) {
    pos[i] = system.basis.index(rho0.codes[i]);
    if (pos[i] < 0) throw std::invalid_argument("initial state has weight outside the basis");
  }
  for (std::size_t r = 0; r < pos.size(); ++r)
    for (std::size_t c = 0; c < pos.size(); ++c)
      y[static_cast<std::size_t>(pos[c]) * d + static_cast<std::size_t>(pos[r])] +=
          rho0.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  DenseEngine engine(system);
  return run_engine(engine, std::move(y), t_grid, opts);
}

LindbladSystem full_fock_system(const ModelParams& p) {
  p.spec.validate();
  const int n = p.spec.n_sites;
  if (n > 10) throw CapExceeded("full Fock reference limited to 10 sites");
  std::vector<Code> all(std::size_t{1} << n);
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<Code>(c);
  LindbladSystem s;
  s.n_sites = n;
  s.basis = HilbertSector::from_codes(n, all, true);
  s.H = build_hamiltonian(p, s.basis);
  s.jumps = build_jump_operators(p, s.basis, s.basis);
  return s;
}

}  // namespace zeno
