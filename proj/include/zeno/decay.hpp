#pragma once

// Closed-form loss dynamics of the unit-filled lattice and a truncated
// correlator-hierarchy integrator used to check it.

#include <vector>

namespace zeno {

// Density of the Mott state under pure pair loss.
double mott_density(double gamma, double t);

// G(x, t) = exp((2 + x) e^{-gamma t} - 2).
double generating_function(double x, double gamma, double t);

// Exact correlator C_k(t) = e^{-k gamma t} p(t).
double mott_correlator(int k, double gamma, double t);

enum class Closure {
  zero,        // C_{kmax+1} = 0
  mean_field,  // C_{kmax+1} = C_kmax * C_1
  ring,        // finite loss cycle of ring_length sites: top equation -gamma L C_{L-1}
};

struct DecayParams {
  double gamma = 1.0;
  double t_max = 5.0;
  int truncation_order = 20;  // k_max
  Closure closure = Closure::zero;
  int ring_length = 0;  // only for Closure::ring; k_max is then ring_length - 1
};

struct CorrelatorSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[i][k] = C_k(times[i])
  double initial_slope = 0.0;               // dC_0/dt at t = 0 from the right-hand side
};

// Integrates Cdot_k = -gamma (k C_k + 2 C_{k+1}) from C_k(0) = 1.
// Throws NumericalError if the integrator cannot meet its tolerance.
CorrelatorSeries hierarchy_oracle(const DecayParams& params, const std::vector<double>& t_grid);

// Uniform grid of `points` samples on [0, t_max].
std::vector<double> uniform_grid(double t_max, int points);

}  // namespace zeno
