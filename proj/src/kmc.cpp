#include "zeno/kmc.hpp"

#include <cmath>
#include <stdexcept>

#include "zeno/parallel.hpp"

namespace zeno {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5a3e1u};
  return std::mt19937_64(seq);
}

namespace {

// Channels (a, b) with O(1) insertion/removal from the active set.
class ActivePairs {
 public:
  explicit ActivePairs(const LatticeSpec& spec)
      : channels_(spec.loss_channels()),
        by_site_(static_cast<std::size_t>(spec.n_sites)),
        slot_(channels_.size(), -1) {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      by_site_[static_cast<std::size_t>(channels_[c].first)].push_back(static_cast<int>(c));
      by_site_[static_cast<std::size_t>(channels_[c].second)].push_back(static_cast<int>(c));
    }
  }

  void reset(const std::vector<std::uint8_t>& occ) {
    active_.clear();
    std::fill(slot_.begin(), slot_.end(), -1);
    for (std::size_t c = 0; c < channels_.size(); ++c)
      if (occ[static_cast<std::size_t>(channels_[c].first)] &&
          occ[static_cast<std::size_t>(channels_[c].second)])
        insert(static_cast<int>(c));
  }

  std::size_t size() const noexcept { return active_.size(); }
  int at(std::size_t i) const { return active_[i]; }
  std::pair<int, int> channel(int c) const { return channels_[static_cast<std::size_t>(c)]; }

  // Site s just became empty: every channel through it dies.
  void vacate(int s) {
    for (int c : by_site_[static_cast<std::size_t>(s)])
      if (slot_[static_cast<std::size_t>(c)] >= 0) erase(c);
  }

 private:
  void insert(int c) {
    slot_[static_cast<std::size_t>(c)] = static_cast<int>(active_.size());
    active_.push_back(c);
  }
  void erase(int c) {
    const int pos = slot_[static_cast<std::size_t>(c)];
    const int last = active_.back();
    active_[static_cast<std::size_t>(pos)] = last;
    slot_[static_cast<std::size_t>(last)] = pos;
    active_.pop_back();
    slot_[static_cast<std::size_t>(c)] = -1;
  }

  std::vector<std::pair<int, int>> channels_;
  std::vector<std::vector<int>> by_site_;
  std::vector<int> slot_;
  std::vector<int> active_;
};

struct Simulator {
  const LatticeSpec& spec;
  double gamma;
  ActivePairs pairs;
  std::vector<std::uint8_t> occ;

  Simulator(const LatticeSpec& s, double g) : spec(s), gamma(g), pairs(s) {}

  void load(const FockConfiguration& init) {
    occ.assign(static_cast<std::size_t>(spec.n_sites), 0);
    for (int j = 0; j < spec.n_sites; ++j) occ[static_cast<std::size_t>(j)] = init.occupied(j);
    pairs.reset(occ);
  }

  // Draws the next event. Returns false when no pair is left.
  // before(t_next) runs while occ still holds the pre-jump configuration.
  template <class Before, class OnJump>
  bool step(std::mt19937_64& rng, double& t, double t_max, Before&& before, OnJump&& on_jump) {
    const std::size_t n = pairs.size();
    if (n == 0 || gamma <= 0.0) return false;
    std::exponential_distribution<double> wait(gamma * static_cast<double>(n));
    const double t_next = t + wait(rng);
    if (t_next > t_max) {
      t = t_max;
      return false;
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto [a, b] = pairs.channel(pairs.at(pick(rng)));
    before(t_next);
    t = t_next;
    occ[static_cast<std::size_t>(a)] = 0;
    occ[static_cast<std::size_t>(b)] = 0;
    pairs.vacate(a);
    pairs.vacate(b);
    on_jump(t, a, b);
    return true;
  }
};

FockConfiguration resolve_initial(const LatticeSpec& spec, const FockConfiguration& initial) {
  if (initial.size() == 0) return FockConfiguration::mott(spec.n_sites);
  if (initial.size() != spec.n_sites)
    throw std::invalid_argument("initial configuration length differs from lattice size");
  return initial;
}

}  // namespace

Trajectory run_trajectory(const KmcRun& run, std::uint64_t stream) {
  run.spec.validate();
  if (run.gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
  Simulator sim(run.spec, run.gamma);
  sim.load(resolve_initial(run.spec, run.initial));
  auto rng = make_stream(run.seed, stream);
  Trajectory out;
  double t = 0.0;
  while (sim.step(rng, t, run.t_max, [](double) {},
                  [&](double tj, int a, int b) { out.jumps.push_back({tj, {a, b}}); })) {
  }
  out.exhausted = sim.pairs.size() == 0;
  out.final_state = FockConfiguration(run.spec.n_sites);
  for (int j = 0; j < run.spec.n_sites; ++j)
    out.final_state.set(j, sim.occ[static_cast<std::size_t>(j)] != 0);
  return out;
}

namespace {

// Ensemble members are grouped in fixed blocks so that the floating-point
// reduction order does not depend on the number of workers.
constexpr int kBlock = 64;

struct DensityAccumulator {
  std::vector<double> sum, sum_sq;            // [time]
  std::vector<double> site_sum;               // [time * N + site]
  void init(std::size_t times, std::size_t n) {
    sum.assign(times, 0.0);
    sum_sq.assign(times, 0.0);
    site_sum.assign(times * n, 0.0);
  }
};

}  // namespace

ObservableSeries ensemble_density(const LatticeSpec& spec, double gamma, int trajectories,
                                  const std::vector<double>& t_grid, std::uint64_t seed,
                                  const FockConfiguration& initial, int workers) {
  spec.validate();
  if (trajectories < 1) throw std::invalid_argument("need at least one trajectory");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("time grid must be sorted");
  const FockConfiguration init = resolve_initial(spec, initial);
  const auto n = static_cast<std::size_t>(spec.n_sites);
  const std::size_t nt = t_grid.size();
  const double t_end = t_grid.empty() ? 0.0 : t_grid.back();
  const int blocks = (trajectories + kBlock - 1) / kBlock;
  std::vector<DensityAccumulator> acc(static_cast<std::size_t>(blocks));

  parallel_for(
      static_cast<std::size_t>(blocks),
      [&](std::size_t blk) {
        DensityAccumulator& a = acc[blk];
        a.init(nt, n);
        Simulator sim(spec, gamma);
        const int first = static_cast<int>(blk) * kBlock;
        const int last = std::min(trajectories, first + kBlock);
        for (int traj = first; traj < last; ++traj) {
          sim.load(init);
          auto rng = make_stream(seed, static_cast<std::uint64_t>(traj));
          int bosons = init.count();
          std::size_t gi = 0;
          auto record_until = [&](double t_event) {
            // Grid points strictly before the event see the current state.
            for (; gi < nt && t_grid[gi] < t_event; ++gi) {
              const double p = static_cast<double>(bosons) / static_cast<double>(n);
              a.sum[gi] += p;
              a.sum_sq[gi] += p * p;
              double* row = a.site_sum.data() + gi * n;
              for (std::size_t j = 0; j < n; ++j) row[j] += sim.occ[j];
            }
          };
          double t = 0.0;
          while (sim.step(rng, t, t_end, record_until, [&](double, int, int) { bosons -= 2; })) {
          }
          record_until(std::numeric_limits<double>::infinity());
        }
      },
      workers);

  DensityAccumulator total;
  total.init(nt, n);
  for (const auto& a : acc) {
    for (std::size_t i = 0; i < nt; ++i) {
      total.sum[i] += a.sum[i];
      total.sum_sq[i] += a.sum_sq[i];
    }
    for (std::size_t i = 0; i < total.site_sum.size(); ++i) total.site_sum[i] += a.site_sum[i];
  }
  const double m = trajectories;
  ObservableSeries out;
  out.times = t_grid;
  for (std::size_t i = 0; i < nt; ++i) {
    const double mean = total.sum[i] / m;
    const double var = m > 1 ? std::max(0.0, (total.sum_sq[i] - m * mean * mean) / (m - 1)) : 0.0;
    out.total_density.push_back(mean);
    out.total_stderr.push_back(std::sqrt(var / m));
    std::vector<double> site(n), site_err(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double q = total.site_sum[i * n + j] / m;  // Bernoulli mean
      site[j] = q;
      site_err[j] = m > 1 ? std::sqrt(q * (1.0 - q) / (m - 1)) : 0.0;
    }
    out.site_density.push_back(std::move(site));
    out.site_stderr.push_back(std::move(site_err));
  }
  return out;
}

namespace {

struct FinalSummary {
  std::map<std::pair<ComplexKind, int>, long> sizes;
  long bosons = 0;
};

}  // namespace

StationaryStatistics stationary_statistics(const LatticeSpec& spec, double gamma,
                                           int trajectories, std::uint64_t seed,
                                           const FockConfiguration& initial, int workers) {
  spec.validate();
  if (trajectories < 1) throw std::invalid_argument("need at least one trajectory");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const FockConfiguration init = resolve_initial(spec, initial);
  std::vector<FinalSummary> finals(static_cast<std::size_t>(trajectories));
  KmcRun run{spec, gamma, init, seed, std::numeric_limits<double>::infinity()};
  parallel_for(
      finals.size(),
      [&](std::size_t i) {
        const Trajectory tr = run_trajectory(run, i);
        FinalSummary& f = finals[i];
        f.bosons = tr.final_state.count();
        for (const auto& c : classify_complexes(tr.final_state, spec))
          ++f.sizes[{c.kind, c.boson_count}];
      },
      workers);

  StationaryStatistics st;
  st.trajectories = trajectories;
  std::map<std::pair<ComplexKind, int>, long> sizes;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& f : finals) {
    for (const auto& [key, c] : f.sizes) sizes[key] += c;
    const double p = static_cast<double>(f.bosons) / spec.n_sites;
    sum += p;
    sum_sq += p * p;
  }
  long complexes = 0, bosons = 0;
  for (const auto& [key, c] : sizes) {
    complexes += c;
    bosons += c * key.second;
  }
  st.total_complexes = complexes;
  for (ComplexKind k : {ComplexKind::free, ComplexKind::type_one, ComplexKind::type_two}) {
    st.species_fraction[k] = 0.0;
    st.boson_fraction[k] = 0.0;
  }
  for (const auto& [key, c] : sizes) {
    const double frac = complexes ? static_cast<double>(c) / complexes : 0.0;
    st.size_distribution[key] = frac;
    st.species_fraction[key.first] += frac;
    st.boson_fraction[key.first] += bosons ? static_cast<double>(c * key.second) / bosons : 0.0;
  }
  const double m = trajectories;
  st.mean_density = sum / m;
  const double var = m > 1 ? std::max(0.0, (sum_sq - m * st.mean_density * st.mean_density) / (m - 1)) : 0.0;
  st.density_stderr = std::sqrt(var / m);
  return st;
}

}  // namespace zeno
