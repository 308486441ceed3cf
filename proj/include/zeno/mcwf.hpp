#pragma once

// Quantum-jump unraveling of the pair-loss master equation.

#include <cstdint>
#include <map>
#include <vector>

#include "zeno/lindblad.hpp"

namespace zeno {

struct McwfOptions {
  std::size_t amplitude_cap = 200000;  // largest sector dimension
  double bisection_rtol = 1e-6;        // relative accuracy of jump times
  OdeOptions ode;
  int workers = 0;
};

struct McwfResult {
  ObservableSeries series;  // ensemble means with standard errors
  int trajectories = 0;
  long total_jumps = 0;
  std::map<int, double> final_boson_distribution;  // boson number -> fraction at the last grid time
};

// psi0 must lie in a single boson-number sector. Trajectory k draws from
// make_stream(seed, k); results do not depend on the worker count.
McwfResult run_mcwf(const ModelParams& params, const StateVector& psi0,
                    const std::vector<double>& t_grid, int trajectories, std::uint64_t seed,
                    const McwfOptions& opts = {});

}  // namespace zeno
