#include <doctest.h>

#include <cmath>

#include "zeno/decay.hpp"
#include "zeno/kmc.hpp"

using namespace zeno;

namespace {

// Replays the jump record and checks every jump against the configuration
// it acted on.
void check_replay(const KmcRun& run, const Trajectory& tr) {
  FockConfiguration c = run.initial.size() ? run.initial : FockConfiguration::mott(run.spec.n_sites);
  const int n = run.spec.n_sites;
  double prev = 0.0;
  for (const auto& j : tr.jumps) {
    CHECK(j.time >= prev);
    prev = j.time;
    const auto [a, b] = j.pair;
    const int d = std::abs(a - b);
    CHECK((d == run.spec.critical_distance ||
           (run.spec.boundary == Boundary::periodic && n - d == run.spec.critical_distance)));
    REQUIRE(c.occupied(a));
    REQUIRE(c.occupied(b));
    const int before = c.count();
    c.set(a, false);
    c.set(b, false);
    CHECK(c.count() == before - 2);
  }
  CHECK(c == tr.final_state);
}

}  // namespace

TEST_CASE("vacuum has no jumps") {
  KmcRun run{{10, 3, Boundary::periodic}, 1.0, FockConfiguration(10), 5};
  const auto tr = run_trajectory(run);
  CHECK(tr.jumps.empty());
  CHECK(tr.final_state == FockConfiguration(10));
  CHECK(tr.exhausted);
}

TEST_CASE("Mott trajectory ends in a Zeno configuration") {
  const LatticeSpec s{40, 3, Boundary::periodic};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    KmcRun run{s, 1.0, {}, seed};
    const auto tr = run_trajectory(run);
    CHECK(tr.exhausted);
    CHECK(is_zeno_state(tr.final_state, s));
    check_replay(run, tr);
  }
}

TEST_CASE("N = 2R ring removes bosons two at a time") {
  const LatticeSpec s{6, 3, Boundary::periodic};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    KmcRun run{s, 1.0, FockConfiguration::mott(6), seed};
    const auto tr = run_trajectory(run);
    check_replay(run, tr);
    CHECK(tr.final_state.count() % 2 == 0);
  }
}

TEST_CASE("open chain with a single pair always empties") {
  const LatticeSpec s{2, 1, Boundary::open};
  const auto st = stationary_statistics(s, 1.0, 200, 9, FockConfiguration::mott(2), 1);
  CHECK(st.mean_density == 0.0);
  CHECK(st.total_complexes == 0);
}

TEST_CASE("trajectories are determined by seed and stream") {
  KmcRun run{{60, 4, Boundary::open}, 2.0, {}, 77};
  const auto a = run_trajectory(run, 3), b = run_trajectory(run, 3), c = run_trajectory(run, 4);
  CHECK(a.jumps == b.jumps);
  CHECK(a.final_state == b.final_state);
  CHECK_FALSE(a.jumps == c.jumps);
}

TEST_CASE("t_max stops the trajectory") {
  KmcRun run{{50, 3, Boundary::periodic}, 1.0, {}, 1, 0.05};
  const auto tr = run_trajectory(run);
  CHECK_FALSE(tr.exhausted);
  for (const auto& j : tr.jumps) CHECK(j.time <= 0.05);
}

TEST_CASE("ensemble density is independent of the worker count") {
  const LatticeSpec s{80, 3, Boundary::periodic};
  const auto grid = uniform_grid(3.0, 13);
  const auto a = ensemble_density(s, 1.0, 300, grid, 5, {}, 1);
  const auto b = ensemble_density(s, 1.0, 300, grid, 5, {}, 4);
  CHECK(a.total_density == b.total_density);
  CHECK(a.total_stderr == b.total_stderr);
  CHECK(a.site_density == b.site_density);
  CHECK(a.total_density.front() == 1.0);
}

TEST_CASE("ensemble density follows the closed form for several R") {
  const auto grid = uniform_grid(5.0, 21);
  for (int r : {2, 3, 5}) {
    CAPTURE(r);
    const LatticeSpec s{200, r, Boundary::periodic};
    const auto e = ensemble_density(s, 1.0, 2000, grid, 100 + static_cast<std::uint64_t>(r));
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double z = std::abs(e.total_density[i] - mott_density(1.0, grid[i])) / e.total_stderr[i];
      CHECK(z < 3.0);
    }
  }
}

TEST_CASE("stationary statistics") {
  const LatticeSpec s{200, 3, Boundary::periodic};
  const auto st = stationary_statistics(s, 1.0, 2000, 17);
  CHECK(std::abs(st.mean_density - std::exp(-2.0)) < 3 * st.density_stderr);
  CHECK(st.species_fraction.at(ComplexKind::free) > st.species_fraction.at(ComplexKind::type_one));
  CHECK(st.species_fraction.at(ComplexKind::type_one) > st.species_fraction.at(ComplexKind::type_two));
  double total = 0.0;
  for (auto [k, v] : st.size_distribution) total += v;
  CHECK(total == doctest::Approx(1.0));
  double species = 0.0;
  for (auto [k, v] : st.species_fraction) species += v;
  CHECK(species == doctest::Approx(1.0));
  // Type II complexes at R = 3 need at least three bosons.
  for (auto [k, v] : st.size_distribution)
    if (k.first == ComplexKind::type_two) CHECK(k.second >= 3);
}

TEST_CASE("stream derivation is reproducible") {
  auto a = make_stream(1, 2), b = make_stream(1, 2), c = make_stream(2, 1);
  CHECK(a() == b());
  CHECK(a() != c());
}
