#include "zeno/scattering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "zeno/bands.hpp"
#include "zeno/effective.hpp"

namespace zeno {

StateVector make_wave_packet(const LatticeSpec& spec, double j0, double q0, double sigma) {
  spec.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("packet width must be positive");
  const int n = spec.n_sites;
  std::vector<Code> codes;
  std::vector<cd> amps;
  double norm2 = 0.0;
  for (int j = 0; j < n; ++j) {
    double dx = j - j0;
    if (spec.boundary == Boundary::periodic) dx -= n * std::round(dx / n);
    const double env = std::exp(-dx * dx / (2.0 * sigma * sigma));
    codes.push_back(site_mask(n, j));
    amps.push_back(std::polar(env, -q0 * j));
    norm2 += env * env;
  }
  StateVector psi = StateVector::superposition(n, codes, amps);
  psi.amplitudes /= std::sqrt(norm2);
  return psi;
}

namespace {

struct Geometry {
  int n = 0;
  int first = 0, last = 0;  // complex (or barrier) extent
  int complex_size = 0;
  int r = 1;
  bool periodic = false;
};

struct Snapshot {
  std::vector<double> dens;
  double reflected = 0, transmitted = 0, region = 0, contact = 0, centroid = 0, momentum = 0;
};

Snapshot observe(const Geometry& g, std::span<const Code> codes, std::span<const cd> amps) {
  Snapshot s;
  s.dens.assign(static_cast<std::size_t>(g.n), 0.0);
  double norm2 = 0.0;
  for (const cd& a : amps) norm2 += std::norm(a);
  if (norm2 <= 0.0) return s;
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const double w = std::norm(amps[k]) / norm2;
    Code c = codes[k];
    while (c) {
      const int bit = std::countr_zero(c);
      s.dens[static_cast<std::size_t>(g.n - 1 - bit)] += w;
      c &= c - 1;
    }
  }
  const int lo_contact = g.first - g.r - 1, hi_contact = g.last + g.r + 1;
  double cw = 0.0, cx = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double d = s.dens[static_cast<std::size_t>(j)];
    if (j < g.first) s.reflected += d;
    else if (j > g.last) s.transmitted += d;
    else s.region += d;
    if (g.complex_size > 0 && (j == lo_contact || j == hi_contact)) s.contact += d;
    if (j >= g.first - 1 && j <= g.last + 1) {
      cw += d;
      cx += d * j;
    }
  }
  s.centroid = cw > 0 ? cx / cw : 0.0;

  // Hopping correlations on bonds clear of the contact zone.
  auto index_of = [&](Code c) -> long {
    const auto it = std::lower_bound(codes.begin(), codes.end(), c);
    return (it == codes.end() || *it != c) ? -1 : static_cast<long>(it - codes.begin());
  };
  cd hop = 0.0;
  for (int j = 0; j + 1 < g.n; ++j) {
    if (g.complex_size > 0 && j + 1 >= lo_contact && j <= hi_contact) continue;
    const Code mi = site_mask(g.n, j), mj = site_mask(g.n, j + 1);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      const Code t = codes[k];
      if (!(t & mj) || (t & mi)) continue;
      const long l = index_of(t ^ mi ^ mj);
      if (l >= 0) hop += amps[k] * std::conj(amps[static_cast<std::size_t>(l)]);
    }
  }
  s.momentum = -std::arg(hop);
  return s;
}

}  // namespace

CollisionReport run_collision(const CollisionSetup& setup, const std::vector<double>& t_grid,
                              const MasterOptions& opts) {
  const LatticeSpec& spec = setup.spec;
  spec.validate();
  const int n = spec.n_sites;
  Geometry g;
  g.n = n;
  g.r = spec.critical_distance;
  g.periodic = spec.boundary == Boundary::periodic;
  std::vector<int> cs = setup.complex_sites;
  std::sort(cs.begin(), cs.end());
  Code complex_code = 0;
  for (int s : cs) {
    if (s < 0 || s >= n) throw std::invalid_argument("complex site outside the lattice");
    complex_code |= site_mask(n, s);
  }
  if (!cs.empty()) {
    g.first = cs.front();
    g.last = cs.back();
    g.complex_size = static_cast<int>(cs.size());
  } else {
    g.first = g.last = setup.barrier_site >= 0 ? setup.barrier_site : n / 2;
  }

  const StateVector packet = make_wave_packet(spec, setup.j0, setup.q0, setup.sigma);
  CollisionReport rep;
  if (!cs.empty()) {
    for (int j = g.first - g.r; j <= g.last + g.r; ++j) {
      const int s = spec.site(j);
      if (s >= 0) rep.initial_overlap += std::norm(packet.amplitude(site_mask(n, s)));
    }
    if (rep.initial_overlap > 1e-6)
      throw std::invalid_argument("wave packet overlaps the complex exclusion zone (" +
                                  std::to_string(rep.initial_overlap) + ")");
  }
  std::vector<Code> codes;
  std::vector<cd> amps;
  for (std::size_t k = 0; k < packet.codes.size(); ++k) {
    if (packet.codes[k] & complex_code) continue;
    // The projected evolution lives on Zeno configurations; the packet tail
    // inside the exclusion zone (< 1e-6 by the check above) is dropped.
    if (setup.method == CollisionMethod::zeno && !is_zeno_code(packet.codes[k] | complex_code, spec))
      continue;
    codes.push_back(packet.codes[k] | complex_code);
    amps.push_back(packet.amplitudes[static_cast<Eigen::Index>(k)]);
  }
  StateVector psi0 = StateVector::superposition(n, codes, amps);
  psi0.normalize();

  const ModelParams params{spec, setup.J, setup.gamma, 0.0};
  auto record = [&](double t, std::span<const Code> c, std::span<const cd> a, double survival,
                    double total) {
    Snapshot s = observe(g, c, a);
    rep.times.push_back(t);
    rep.site_density.push_back(std::move(s.dens));
    rep.reflected.push_back(s.reflected);
    rep.transmitted.push_back(s.transmitted);
    rep.complex_region.push_back(s.region);
    rep.contact_weight.push_back(s.contact);
    rep.complex_centroid.push_back(s.centroid);
    rep.momentum.push_back(s.momentum);
    rep.survival.push_back(survival);
    rep.total_density.push_back(total);
  };

  if (setup.method == CollisionMethod::full) {
    MasterOptions o = opts;
    o.observer = [&](double t, const MasterView& v) {
      double surv = 0.0;
      for (const cd& x : v.pure) surv += std::norm(x);
      const auto dens = v.site_densities();
      double tot = 0.0;
      for (double d : dens) tot += d;
      record(t, *v.pure_codes, v.pure, surv, tot / n);
    };
    integrate_master(params, psi0, t_grid, o);
  } else {
    const auto basis = HilbertSector::zeno(spec, std::popcount(psi0.codes.front()));
    const auto states = evolve_coherent(params, basis, psi0, t_grid, opts.ode);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto& st = states[i];
      std::vector<cd> a(st.amplitudes.data(), st.amplitudes.data() + st.amplitudes.size());
      const double surv = st.amplitudes.squaredNorm();
      double tot = 0.0;
      for (double d : st.site_densities()) tot += d;
      record(t_grid[i], st.codes, a, surv, tot / n);
    }
  }

  constexpr double kContact = 1e-3;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.window_start < 0.0) {
      if (rep.contact_weight[i] > kContact) rep.window_start = rep.times[i];
    } else if (rep.window_end < 0.0 && rep.contact_weight[i] < kContact) {
      rep.window_end = rep.times[i];
      rep.q_out = rep.momentum[i];
    }
  }
  if (!rep.times.empty()) {
    rep.q_in = rep.momentum.front();
    if (rep.window_end < 0.0) rep.q_out = rep.momentum.back();
    const std::size_t last = rep.times.size() - 1;
    const double free_region = std::max(0.0, rep.complex_region[last] - g.complex_size);
    const double free_total = rep.reflected[last] + rep.transmitted[last] + free_region;
    rep.reflected_weight = rep.reflected[last] / free_total;
    rep.transmitted_weight = rep.transmitted[last] / free_total;
    if (g.complex_size > 0)
      for (double c : rep.complex_centroid)
        rep.max_displacement = std::max(rep.max_displacement, std::abs(c - rep.complex_centroid.front()));
  }
  return rep;
}

ExclusionResult exclusion_range_check(const LatticeSpec& spec, int alpha, int beta, double t_max,
                                      int start_gap) {
  spec.validate();
  const int r = spec.critical_distance;
  const InternalBasis basis = enumerate_internal_states(r, 2, KindRequest::type_one);
  auto state_of_extent = [&](int e) {
    for (const auto& s : basis.states)
      if (s.back() == e) return s;
    throw std::invalid_argument("no two-boson internal state of extent " + std::to_string(e));
  };
  const auto left = state_of_extent(alpha);
  const auto right = state_of_extent(beta);
  const int n = spec.n_sites;
  const int a0 = 2;
  const int b0 = a0 + alpha + r + 1 + start_gap;
  if (b0 + beta + 2 >= n) throw std::invalid_argument("chain too short for the exclusion check");
  Code seed = 0;
  for (int o : left) seed |= site_mask(n, a0 + o);
  for (int o : right) seed |= site_mask(n, b0 + o);

  const HilbertSector comp = reachable_zeno_component(spec, {seed});
  // For every configuration: (left extent, right extent, anchor separation), or
  // nothing when it is not two separate two-boson complexes.
  struct Tag {
    bool valid = false;
    int ea = 0, eb = 0, sep = 0;
  };
  std::vector<Tag> tags(comp.size());
  ExclusionResult res;
  res.alpha = alpha;
  res.beta = beta;
  for (std::size_t k = 0; k < comp.size(); ++k) {
    const auto cx = classify_complexes(comp.config(k), spec);
    if (cx.size() != 2 || cx[0].boson_count != 2 || cx[1].boson_count != 2) continue;
    const auto& a = cx[0].anchor < cx[1].anchor ? cx[0] : cx[1];
    const auto& b = cx[0].anchor < cx[1].anchor ? cx[1] : cx[0];
    tags[k] = {true, a.extent, b.extent, b.anchor - a.anchor};
    if (a.extent == alpha && b.extent == beta &&
        (res.contact_reachable < 0 || tags[k].sep < res.contact_reachable))
      res.contact_reachable = tags[k].sep;
  }

  const auto grid = [&] {
    std::vector<double> g;
    for (int i = 0; i <= 400; ++i) g.push_back(t_max * i / 400.0);
    return g;
  }();
  const auto psi0 = StateVector::basis_state(FockConfiguration::from_code(seed, n));
  const auto states = evolve_coherent({spec, 1.0, 0.0, 0.0}, comp, psi0, grid);
  std::map<int, double> best;  // separation -> max weight in the (alpha, beta) channel
  for (const auto& st : states) {
    std::map<int, double> w;
    for (std::size_t k = 0; k < st.codes.size(); ++k) {
      const Tag& tg = tags[k];
      if (tg.valid && tg.ea == alpha && tg.eb == beta)
        w[tg.sep] += std::norm(st.amplitudes[static_cast<Eigen::Index>(k)]);
    }
    for (auto [sep, x] : w) best[sep] = std::max(best[sep], x);
  }
  for (auto [sep, x] : best) {
    if (x > 1e-3) {
      res.contact_evolved = sep;
      res.weight = x;
      break;
    }
  }
  return res;
}

int boson_exclusion_width(const LatticeSpec& spec, const std::vector<int>& complex_sites,
                          int boson_site) {
  spec.validate();
  const int n = spec.n_sites;
  Code seed = site_mask(n, boson_site);
  for (int s : complex_sites) seed |= site_mask(n, s);
  const HilbertSector comp = reachable_zeno_component(spec, {seed});
  const int first = *std::min_element(complex_sites.begin(), complex_sites.end());
  const int last = *std::max_element(complex_sites.begin(), complex_sites.end());
  const bool left_side = boson_site < first;
  int closest = left_side ? -1 : n;
  for (Code c : comp.codes()) {
    if ((c & seed & ~site_mask(n, boson_site)) != (seed & ~site_mask(n, boson_site))) continue;
    const Code rest = c & ~(seed & ~site_mask(n, boson_site));
    if (std::popcount(rest) != 1) continue;
    const int pos = n - 1 - std::countr_zero(rest);
    if (left_side && pos < first) closest = std::max(closest, pos);
    if (!left_side && pos > last) closest = std::min(closest, pos);
  }
  return left_side ? first - closest - 1 : closest - last - 1;
}

}  // namespace zeno
