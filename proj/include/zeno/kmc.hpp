#pragma once

// Continuous-time Monte Carlo of pure pair loss acting on Fock
// configurations (Gillespie direct method).

#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "zeno/lattice.hpp"
#include "zeno/observables.hpp"

namespace zeno {

// Independent stream for trajectory `index` of an ensemble seeded with `seed`.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index);

struct KmcRun {
  LatticeSpec spec;
  double gamma = 1.0;
  FockConfiguration initial;
  std::uint64_t seed = 0;
  double t_max = std::numeric_limits<double>::infinity();
};

struct JumpRecord {
  double time = 0.0;
  std::pair<int, int> pair;

  friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

struct Trajectory {
  std::vector<JumpRecord> jumps;
  FockConfiguration final_state;
  bool exhausted = false;  // stopped because no pair at distance R was left
};

// The trajectory is a function of (run, stream) only; `stream` selects the
// ensemble member (0 for a single run).
Trajectory run_trajectory(const KmcRun& run, std::uint64_t stream = 0);

// Site-resolved mean density over `trajectories` members started from
// `initial` (Mott state when empty), with standard errors.
ObservableSeries ensemble_density(const LatticeSpec& spec, double gamma, int trajectories,
                                  const std::vector<double>& t_grid, std::uint64_t seed,
                                  const FockConfiguration& initial = {}, int workers = 0);

struct StationaryStatistics {
  int trajectories = 0;
  // Fraction of complexes of each kind, and fraction of surviving bosons
  // bound in each kind.
  std::map<ComplexKind, double> species_fraction;
  std::map<ComplexKind, double> boson_fraction;
  // (kind, boson count) -> fraction of all complexes.
  std::map<std::pair<ComplexKind, int>, double> size_distribution;
  double mean_density = 0.0;
  double density_stderr = 0.0;
  long total_complexes = 0;
};

StationaryStatistics stationary_statistics(const LatticeSpec& spec, double gamma,
                                           int trajectories, std::uint64_t seed,
                                           const FockConfiguration& initial = {},
                                           int workers = 0);

}  // namespace zeno
