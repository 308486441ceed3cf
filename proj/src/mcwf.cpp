#include "zeno/mcwf.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "zeno/kernels.hpp"
#include "zeno/kmc.hpp"
#include "zeno/parallel.hpp"

namespace zeno {
namespace {

struct JumpSector {
  int m = 0;
  HilbertSector basis;
  SparseMatrix H;
  std::vector<double> half_loss;
  bool lossless = true;
  // Per channel: (index here, index in sector m-2).
  std::vector<std::vector<std::pair<int, int>>> channels;
};

std::vector<JumpSector> build_ladder(const ModelParams& p, int m_top, std::size_t cap) {
  std::vector<JumpSector> ladder;
  const int n = p.spec.n_sites;
  for (int m = m_top; m >= 0; m -= 2) {
    if (binomial(n, m) > cap)
      throw CapExceeded("sector dimension " + std::to_string(binomial(n, m)) +
                        " exceeds amplitude cap " + std::to_string(cap));
    JumpSector s;
    s.m = m;
    s.basis = HilbertSector::full(n, m);
    s.H = build_hamiltonian(p, s.basis);
    s.half_loss = loss_rates(p, s.basis);
    for (double& v : s.half_loss) {
      if (v != 0.0) s.lossless = false;
      v *= -0.5;
    }
    ladder.push_back(std::move(s));
  }
  const auto chans = p.spec.loss_channels();
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    auto& s = ladder[i];
    const auto& below = ladder[i + 1].basis;
    s.channels.resize(chans.size());
    for (std::size_t c = 0; c < chans.size(); ++c) {
      const Code mask = site_mask(n, chans[c].first) | site_mask(n, chans[c].second);
      for (std::size_t k = 0; k < s.basis.size(); ++k) {
        const Code code = s.basis.code(k);
        if ((code & mask) == mask)
          s.channels[c].emplace_back(static_cast<int>(k),
                                     static_cast<int>(below.index(code & ~mask)));
      }
    }
  }
  return ladder;
}

constexpr int kBlock = 16;

struct Accumulator {
  std::vector<double> site_sum, site_sq, tot_sum, tot_sq;
  std::map<int, long> finals;
  long jumps = 0;
};

}  // namespace

McwfResult run_mcwf(const ModelParams& p, const StateVector& psi0,
                    const std::vector<double>& t_grid, int trajectories, std::uint64_t seed,
                    const McwfOptions& opts) {
  p.spec.validate();
  if (trajectories < 1) throw std::invalid_argument("need at least one trajectory");
  if (psi0.codes.empty()) throw std::invalid_argument("empty initial state");
  if (psi0.n_sites != p.spec.n_sites) throw std::invalid_argument("state and lattice size differ");
  const int m0 = std::popcount(psi0.codes.front());
  for (Code c : psi0.codes)
    if (std::popcount(c) != m0) throw std::invalid_argument("MCWF initial state must have a fixed boson number");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("time grid must be sorted");

  const auto ladder = build_ladder(p, m0, opts.amplitude_cap);
  const int n = p.spec.n_sites;
  const auto nsites = static_cast<std::size_t>(n);
  const std::size_t nt = t_grid.size();

  std::vector<cd> init(ladder[0].basis.size(), cd{});
  for (std::size_t i = 0; i < psi0.codes.size(); ++i)
    init[static_cast<std::size_t>(ladder[0].basis.index(psi0.codes[i]))] +=
        psi0.amplitudes[static_cast<Eigen::Index>(i)];
  {
    const double nrm = std::sqrt(kernels::sq_norm(init));
    if (nrm == 0.0) throw std::invalid_argument("initial state has zero norm");
    for (cd& a : init) a /= nrm;
  }

  const int blocks = (trajectories + kBlock - 1) / kBlock;
  std::vector<Accumulator> acc(static_cast<std::size_t>(blocks));

  auto trajectory = [&](int index, Accumulator& a) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(index));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t level = 0;
    std::vector<cd> psi = init;
    double threshold = unif(rng);
    double t = 0.0;

    auto make_ode = [&](std::size_t lv) {
      const JumpSector* s = &ladder[lv];
      return DormandPrince<cd>(
          [s](double, std::span<const cd> y, std::span<cd> dy) {
            Eigen::Map<const Eigen::VectorXcd> x(y.data(), static_cast<Eigen::Index>(y.size()));
            Eigen::Map<Eigen::VectorXcd> dx(dy.data(), static_cast<Eigen::Index>(dy.size()));
            dx.noalias() = cd(0.0, -1.0) * (s->H * x);
            kernels::diag_axpy(0.0, s->half_loss, y, dy);
          },
          opts.ode);
    };
    auto ode = make_ode(level);
    std::vector<cd> prev, trial;

    auto jump = [&]() {
      const JumpSector& s = ladder[level];
      std::vector<double> w(s.channels.size(), 0.0);
      double total = 0.0;
      for (std::size_t c = 0; c < s.channels.size(); ++c) {
        for (auto [src, dst] : s.channels[c]) w[c] += std::norm(psi[static_cast<std::size_t>(src)]);
        total += w[c];
      }
      if (total <= 0.0) return false;
      double u = unif(rng) * total;
      std::size_t pick = 0;
      for (; pick + 1 < w.size(); ++pick) {
        if (u < w[pick]) break;
        u -= w[pick];
      }
      while (w[pick] == 0.0) --pick;  // guard against rounding at the upper end
      std::vector<cd> next(ladder[level + 1].basis.size(), cd{});
      for (auto [src, dst] : s.channels[pick])
        next[static_cast<std::size_t>(dst)] = psi[static_cast<std::size_t>(src)];
      const double nrm = std::sqrt(kernels::sq_norm(next));
      for (cd& x : next) x /= nrm;
      psi.swap(next);
      ++level;
      ++a.jumps;
      ode = make_ode(level);
      threshold = unif(rng);
      return true;
    };

    for (std::size_t gi = 0; gi < nt; ++gi) {
      const double target = t_grid[gi];
      while (t < target) {
        const JumpSector& s = ladder[level];
        if (s.m == 0) {  // vacuum: nothing evolves
          t = target;
          break;
        }
        if (s.lossless) {
          ode.advance(t, psi, target);
          break;
        }
        prev = psi;
        const double t0 = t;
        ode.step(t, psi, target);
        if (kernels::sq_norm(psi) > threshold) continue;
        // Bisect the time at which the squared norm crosses the threshold.
        double lo = 0.0, hi = t - t0;
        while (hi - lo > opts.bisection_rtol * std::max(t0 + hi, 1e-12)) {
          const double mid = 0.5 * (lo + hi);
          ode.step_exact(t0, prev, mid, trial);
          if (kernels::sq_norm(trial) > threshold)
            lo = mid;
          else
            hi = mid;
        }
        ode.step_exact(t0, prev, hi, psi);
        t = t0 + hi;
        if (!jump()) ode.reset();
      }
      const double nrm2 = kernels::sq_norm(psi);
      const auto& basis = ladder[level].basis;
      std::vector<double> dens(nsites, 0.0);
      for (std::size_t k = 0; k < psi.size(); ++k) {
        const double w = std::norm(psi[k]) / nrm2;
        Code c = basis.code(k);
        while (c) {
          const int bit = std::countr_zero(c);
          dens[static_cast<std::size_t>(n - 1 - bit)] += w;
          c &= c - 1;
        }
      }
      double tot = 0.0;
      for (std::size_t j = 0; j < nsites; ++j) {
        a.site_sum[gi * nsites + j] += dens[j];
        a.site_sq[gi * nsites + j] += dens[j] * dens[j];
        tot += dens[j];
      }
      tot /= static_cast<double>(n);
      a.tot_sum[gi] += tot;
      a.tot_sq[gi] += tot * tot;
    }
    ++a.finals[ladder[level].m];
  };

  parallel_for(
      static_cast<std::size_t>(blocks),
      [&](std::size_t b) {
        Accumulator& a = acc[b];
        a.site_sum.assign(nt * nsites, 0.0);
        a.site_sq.assign(nt * nsites, 0.0);
        a.tot_sum.assign(nt, 0.0);
        a.tot_sq.assign(nt, 0.0);
        const int first = static_cast<int>(b) * kBlock;
        const int last = std::min(trajectories, first + kBlock);
        for (int k = first; k < last; ++k) trajectory(k, a);
      },
      opts.workers);

  Accumulator sum;
  sum.site_sum.assign(nt * nsites, 0.0);
  sum.site_sq.assign(nt * nsites, 0.0);
  sum.tot_sum.assign(nt, 0.0);
  sum.tot_sq.assign(nt, 0.0);
  for (const auto& a : acc) {
    for (std::size_t i = 0; i < sum.site_sum.size(); ++i) {
      sum.site_sum[i] += a.site_sum[i];
      sum.site_sq[i] += a.site_sq[i];
    }
    for (std::size_t i = 0; i < nt; ++i) {
      sum.tot_sum[i] += a.tot_sum[i];
      sum.tot_sq[i] += a.tot_sq[i];
    }
    for (const auto& [m, c] : a.finals) sum.finals[m] += c;
    sum.jumps += a.jumps;
  }

  const double M = trajectories;
  auto mean_err = [&](double s, double sq) {
    const double mean = s / M;
    const double var = M > 1 ? std::max(0.0, (sq - M * mean * mean) / (M - 1)) : 0.0;
    return std::pair{mean, std::sqrt(var / M)};
  };
  McwfResult out;
  out.trajectories = trajectories;
  out.total_jumps = sum.jumps;
  out.series.times = t_grid;
  for (std::size_t i = 0; i < nt; ++i) {
    std::vector<double> mean(nsites), err(nsites);
    for (std::size_t j = 0; j < nsites; ++j)
      std::tie(mean[j], err[j]) = mean_err(sum.site_sum[i * nsites + j], sum.site_sq[i * nsites + j]);
    out.series.site_density.push_back(std::move(mean));
    out.series.site_stderr.push_back(std::move(err));
    const auto [tm, te] = mean_err(sum.tot_sum[i], sum.tot_sq[i]);
    out.series.total_density.push_back(tm);
    out.series.total_stderr.push_back(te);
  }
  for (const auto& [m, c] : sum.finals) out.final_boson_distribution[m] = c / M;
  return out;
}

}  // namespace zeno
