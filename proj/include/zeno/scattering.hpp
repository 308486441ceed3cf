#pragma once

// Wave-packet collisions with immobile complexes and the exclusion range
// between complexes.

#include <vector>

#include "zeno/lindblad.hpp"

namespace zeno {

// Single boson with amplitudes ~ e^{-i q0 j} e^{-(j-j0)^2 / (2 sigma^2)},
// normalized on the lattice. Periodic lattices use the nearest image of j0.
StateVector make_wave_packet(const LatticeSpec& spec, double j0, double q0, double sigma);

enum class CollisionMethod { full, zeno };

struct CollisionSetup {
  LatticeSpec spec;
  double J = 1.0;
  double gamma = 100.0;
  double j0 = 6.0;
  double q0 = 1.5707963267948966;
  double sigma = 2.0;
  std::vector<int> complex_sites;  // contiguous target, may be empty
  int barrier_site = -1;           // reference site when there is no complex
  CollisionMethod method = CollisionMethod::full;
};

struct CollisionReport {
  std::vector<double> times;
  // Observables conditioned on no loss event (the intact top sector).
  std::vector<std::vector<double>> site_density;
  std::vector<double> reflected, transmitted, complex_region, survival;
  std::vector<double> momentum;           // circular-mean quasi-momentum of the free boson
  std::vector<double> contact_weight;     // free-boson weight next to the complex
  std::vector<double> complex_centroid;
  std::vector<double> total_density;      // unconditional site-averaged density

  double initial_overlap = 0.0;  // packet weight inside the exclusion zone at t = 0
  double window_start = -1.0;    // first time contact_weight > 1e-3 (-1 if never)
  double window_end = -1.0;      // first later time it drops below 1e-3 (-1 if never)
  double q_in = 0.0, q_out = 0.0;
  double reflected_weight = 0.0, transmitted_weight = 0.0;  // at the last grid time
  double max_displacement = 0.0;  // of the complex centroid over the run
};

// Throws std::invalid_argument if the packet overlaps the exclusion zone
// [first - R, last + R] of the complex by more than 1e-6.
CollisionReport run_collision(const CollisionSetup& setup, const std::vector<double>& t_grid,
                              const MasterOptions& opts = {});

struct ExclusionResult {
  int alpha = 0, beta = 0;      // extents of the left and right complex internal states
  int contact_reachable = -1;   // smallest anchor separation reachable in that state pair
  int contact_evolved = -1;     // smallest one carrying weight > 1e-3 during the evolution
  double weight = 0.0;          // largest weight observed at contact_evolved
};

// Two m = 2 complexes on an open chain, left in the state of extent alpha,
// right in the state of extent beta, started `start_gap` sites beyond the
// naive contact and evolved under H_Z up to t_max.
ExclusionResult exclusion_range_check(const LatticeSpec& spec, int alpha, int beta,
                                      double t_max = 8.0, int start_gap = 2);

// Number of empty sites next to the complex (on the side of `boson_site`)
// that a single boson can never enter under constrained hopping.
int boson_exclusion_width(const LatticeSpec& spec, const std::vector<int>& complex_sites,
                          int boson_site);

}  // namespace zeno
