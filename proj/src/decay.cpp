#include "zeno/decay.hpp"

#include <cmath>
#include <stdexcept>

#include "zeno/ode.hpp"

namespace zeno {

double mott_density(double gamma, double t) {
  return std::exp(2.0 * std::expm1(-gamma * t));
}

double generating_function(double x, double gamma, double t) {
  return std::exp((2.0 + x) * std::exp(-gamma * t) - 2.0);
}

double mott_correlator(int k, double gamma, double t) {
  return std::exp(-k * gamma * t) * mott_density(gamma, t);
}

std::vector<double> uniform_grid(double t_max, int points) {
  if (points < 2) throw std::invalid_argument("time grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = t_max * i / (points - 1);
  return g;
}

CorrelatorSeries hierarchy_oracle(const DecayParams& p, const std::vector<double>& t_grid) {
  if (!(p.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  int kmax = p.truncation_order;
  if (p.closure == Closure::ring) {
    if (p.ring_length < 2) throw std::invalid_argument("ring closure needs ring_length >= 2");
    kmax = p.ring_length - 1;
  } else if (kmax < 1) {
    throw std::invalid_argument("truncation order must be >= 1");
  }
  const double g = p.gamma;
  const auto size = static_cast<std::size_t>(kmax + 1);

  auto rhs = [&](double, std::span<const double> c, std::span<double> dc) {
    for (int k = 0; k < kmax; ++k)
      dc[k] = -g * (k * c[k] + 2.0 * c[k + 1]);
    switch (p.closure) {
      case Closure::zero:
        dc[kmax] = -g * kmax * c[kmax];
        break;
      case Closure::mean_field:
        dc[kmax] = -g * (kmax * c[kmax] + 2.0 * c[kmax] * (kmax >= 1 ? c[1] : c[0]));
        break;
      case Closure::ring:
        // Every site of the cycle is occupied: all L pairs are active.
        dc[kmax] = -g * p.ring_length * c[kmax];
        break;
    }
  };

  CorrelatorSeries out;
  std::vector<double> c(size, 1.0);
  {
    std::vector<double> dc(size);
    rhs(0.0, c, dc);
    out.initial_slope = dc[0];
  }
  DormandPrince<double> ode(rhs);
  double t = 0.0;
  for (double target : t_grid) {
    if (target < t) throw std::invalid_argument("time grid must be non-decreasing and start >= 0");
    ode.advance(t, c, target);
    out.times.push_back(target);
    out.values.push_back(c);
  }
  return out;
}

}  // namespace zeno
