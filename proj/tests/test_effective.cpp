#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "zeno/decay.hpp"
#include "zeno/effective.hpp"
#include "zeno/flat_states.hpp"

using namespace zeno;

namespace {

Eigen::MatrixXcd dense(const SparseMatrix& m) { return Eigen::MatrixXcd(m); }

}  // namespace

TEST_CASE("effective rate") {
  const ModelParams p{{8, 3, Boundary::periodic}, 1.0, 100.0, 0.0};
  const auto m = build_effective_model(p, 2);
  CHECK(m.Gamma == doctest::Approx(0.02));
  CHECK(m.jumps.size() == 16);
  CHECK(m.labels.front() == "L1[0]");
  CHECK(m.labels.back() == "L2[7]");
  CHECK_THROWS_AS(build_effective_model({{8, 3, Boundary::open}, 1.0, 100.0, 0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_effective_model({{8, 3, Boundary::periodic}, 1.0, 0.0, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("projected Hamiltonian equals Q0 H Q0") {
  for (auto [n, r] : {std::pair{8, 3}, {9, 4}, {10, 2}}) {
    const ModelParams p{{n, r, Boundary::periodic}, 1.0, 50.0, 0.6};
    const auto m = build_effective_model(p, n);
    const auto h = oracle::hamiltonian({n, r, true, 1.0, 0.0, 0.6});
    const auto hz = dense(m.H_Z);
    for (std::size_t i = 0; i < m.basis.size(); ++i)
      for (std::size_t j = 0; j < m.basis.size(); ++j)
        REQUIRE(std::abs(hz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                         h(m.basis.code(i), m.basis.code(j))) < 1e-14);
    // Closure: every hop out of a Zeno configuration to a non-Zeno one is absent.
    CHECK(m.basis.size() == count_zeno_states(p.spec));
  }
}

TEST_CASE("adjacent pairs are frozen at R = 2") {
  const LatticeSpec s{8, 2, Boundary::periodic};
  const auto sec = HilbertSector::zeno(s, 2);
  const auto h = dense(build_hamiltonian({s, 1.0, 0.0, 0.0}, sec));
  for (int a = 0; a < 8; ++a) {
    const long k = sec.index(site_mask(8, a) | site_mask(8, (a + 1) % 8));
    REQUIRE(k >= 0);
    CHECK(h.row(k).norm() == 0.0);
    CHECK(h.col(k).norm() == 0.0);
  }
}

TEST_CASE("well separated bosons are dark for every effective jump") {
  const ModelParams p{{16, 3, Boundary::periodic}, 1.0, 100.0, 0.0};
  // Gaps larger than R + 1.
  const Code c = site_mask(16, 0) | site_mask(16, 5) | site_mask(16, 10);
  for (int j = 0; j < 16; ++j)
    for (const auto& op : {effective_jump_1(p.spec, j, 0.02), effective_jump_2(p.spec, j, 0.02)})
      for (const auto& t : op) CHECK_FALSE(apply_term(t, c, 16).has_value());
}

TEST_CASE("effective jumps map Zeno states to fewer bosons") {
  const ModelParams p{{10, 3, Boundary::periodic}, 1.0, 100.0, 0.0};
  const auto m = build_effective_model(p, 10);
  for (const auto& l : m.jumps)
    for (int k = 0; k < l.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(l, k); it; ++it) {
        const Code to = m.basis.code(static_cast<std::size_t>(it.row()));
        const Code from = m.basis.code(static_cast<std::size_t>(it.col()));
        CHECK(std::popcount(to) < std::popcount(from));
        CHECK(std::popcount(from) - std::popcount(to) <= 3);
      }
}

TEST_CASE("pair projectors are orthogonal") {
  const LatticeSpec s{10, 3, Boundary::periodic};
  const auto q0 = pair_projector(s, PairClass::zeno);
  const auto q1 = pair_projector(s, PairClass::single_pair);
  const auto q2 = pair_projector(s, PairClass::shared_double);
  CHECK(q1.cwiseProduct(q1) == q1);
  CHECK(q2.cwiseProduct(q2) == q2);
  CHECK(q1.cwiseProduct(q2).sum() == 0.0);
  CHECK(q0.cwiseProduct(q1).sum() == 0.0);
  CHECK(q0.sum() == static_cast<double>(count_zeno_states(s)));
  CHECK(classify_pairs(0b1001000000, s) == PairClass::single_pair);
  CHECK(classify_pairs(0b1001001000, s) == PairClass::shared_double);
}

TEST_CASE("dissipator coherence eigenvalues") {
  for (auto [n, r, g] : {std::tuple{8, 3, 1.0}, {10, 4, 2.5}, {12, 3, 0.7}, {11, 4, 1.3}}) {
    CAPTURE(n);
    const ModelParams p{{n, r, Boundary::periodic}, 1.0, g, 0.0};
    const auto checks = verify_dissipator_spectrum(p, default_dissipator_samples(p.spec));
    std::map<PairClass, int> seen;
    for (const auto& c : checks) {
      ++seen[c.p_class];
      if (c.p_class == PairClass::other) continue;
      CHECK(c.residual < 1e-12);
      CHECK(c.transfer < 1e-12);
    }
    CHECK(seen[PairClass::zeno] >= 1);
    CHECK(seen[PairClass::single_pair] >= 1);
    CHECK(seen[PairClass::shared_double] >= 1);
    for (const auto& c : checks) {
      if (c.p_class == PairClass::single_pair) CHECK(c.measured == doctest::Approx(-g / 2));
      if (c.p_class == PairClass::shared_double) CHECK(c.measured == doctest::Approx(-g));
      if (c.p_class == PairClass::zeno) CHECK(c.measured == 0.0);
    }
  }
  const ModelParams p{{8, 3, Boundary::periodic}, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(verify_dissipator_spectrum(p, {{0b10010000, 0b1}}), std::invalid_argument);
}

TEST_CASE("effective and full dynamics agree at strong loss") {
  const LatticeSpec s{10, 3, Boundary::periodic};
  const auto psi = StateVector::basis_state(FockConfiguration::from_string("1100000000"));
  const auto grid = uniform_grid(5.0, 51);
  auto deviation = [&](double gamma) {
    const ModelParams p{s, 1.0, gamma, 0.0};
    const auto full = integrate_master(p, psi, grid);
    const auto eff = integrate_effective(build_effective_model(p, 2), psi, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < 10; ++j)
        worst = std::max(worst, std::abs(full.series.site_density[i][j] - eff.series.site_density[i][j]));
    return worst;
  };
  const double d100 = deviation(100.0);
  CHECK(d100 < 0.05);
  // Regression values of these runs.
  CHECK(d100 == doctest::Approx(9.91992766e-4).epsilon(1e-4));
  CHECK(deviation(200.0) == doctest::Approx(2.63834134e-4).epsilon(1e-4));
}

TEST_CASE("unitary effective limit preserves purity") {
  const ModelParams p{{9, 3, Boundary::periodic}, 1e-4, 1e4, 0.0};
  auto m = build_effective_model(p, 2);
  const auto psi = StateVector::basis_state(FockConfiguration::from_string("110000000"));
  m.H_Z = build_hamiltonian({p.spec, 1.0, 0.0, 0.0}, m.basis);
  m.jumps.clear();
  const auto r = integrate_effective(m, psi, uniform_grid(3.0, 13));
  for (double pu : r.purity) CHECK(std::abs(pu - 1.0) < 1e-8);
}

TEST_CASE("three-boson configuration with an active B term") {
  // Bosons at j-R, j-1, j+R: B_j removes all three. The same configuration is
  // hit by L1[j] and L1[j-R] through their B parts, so the escape rate out of
  // the three-boson sector is 5 Gamma, with Gamma from the L2 channel alone.
  // Only B_5 acts here; on smaller rings a wrapped B term hits the same bosons.
  const LatticeSpec s{14, 3, Boundary::periodic};
  const ModelParams p{s, 1.0, 100.0, 0.0};
  const auto m = build_effective_model(p, 3);
  const Code c = site_mask(14, 2) | site_mask(14, 4) | site_mask(14, 8);
  REQUIRE(is_zeno_code(c, s));
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.basis.size()));
  x[m.basis.index(c)] = 1.0;
  double total = 0.0, l2 = 0.0;
  for (std::size_t k = 0; k < m.jumps.size(); ++k) {
    const double w = (m.jumps[k] * x).squaredNorm();
    total += w;
    if (m.labels[k].rfind("L2", 0) == 0) l2 += w;
  }
  CHECK(l2 == doctest::Approx(m.Gamma).epsilon(1e-12));
  CHECK(total == doctest::Approx(5 * m.Gamma).epsilon(1e-12));

  // Initial boson loss: four two-boson channels and one three-boson channel.
  const double h = 1e-4;
  const auto r = integrate_effective(m, StateVector::basis_state(FockConfiguration::from_code(c, 14)), {0.0, h});
  const double slope = (r.series.total_density[1] - r.series.total_density[0]) * 14 / h;
  CHECK(slope == doctest::Approx(-11 * m.Gamma).epsilon(1e-3));
}

TEST_CASE("coherent evolution on a reachable component") {
  const LatticeSpec s{12, 3, Boundary::periodic};
  const Code seed = site_mask(12, 0) | site_mask(12, 1);
  const auto comp = reachable_zeno_component(s, {seed});
  CHECK(comp.size() == 24);  // two internal states times twelve anchors
  const auto psi = StateVector::basis_state(FockConfiguration::from_code(seed, 12));
  const auto states = evolve_coherent({s, 1.0, 0.0, 0.0}, comp, psi, uniform_grid(4.0, 9));
  for (const auto& st : states) CHECK(std::abs(st.norm() - 1.0) < 1e-8);
}

TEST_CASE("type I flat states") {
  const LatticeSpec s{10, 4, Boundary::periodic};
  const auto psi = make_flat_state_I(s, 0);
  CHECK(psi.norm() == doctest::Approx(1.0));
  double e = 1.0;
  CHECK(zeno_eigen_residual(s, psi, &e) < 1e-12);
  CHECK(std::abs(e) < 1e-12);
  REQUIRE(psi.codes.size() == 2);
  CHECK(psi.amplitude(FockConfiguration::from_string("1001000000").code()).real() == doctest::Approx(-1 / std::sqrt(2.0)));
  CHECK(psi.amplitude(FockConfiguration::from_string("0110000000").code()).real() == doctest::Approx(1 / std::sqrt(2.0)));
  for (int r : {2, 6, 8}) {
    const LatticeSpec sr{3 * r + 4, r, Boundary::periodic};
    const auto f = make_flat_state_I(sr, 1);
    CHECK(zeno_eigen_residual(sr, f) < 1e-12);
    CHECK(f.norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(make_flat_state_I({10, 3, Boundary::periodic}, 0), std::invalid_argument);
}

TEST_CASE("type II localized states") {
  const LatticeSpec open{12, 4, Boundary::open};
  const auto f = make_flat_state_II(open, 1);
  CHECK(f.norm() == doctest::Approx(1.0));
  CHECK(zeno_eigen_residual(open, f) < 1e-12);
  const LatticeSpec ring{16, 4, Boundary::periodic};
  CHECK(zeno_eigen_residual(ring, make_flat_state_II(ring, 3)) < 1e-12);
  const LatticeSpec ring12{12, 4, Boundary::periodic};
  CHECK(zeno_eigen_residual(ring12, make_flat_state_II(ring12, 0)) < 1e-12);

  // R = 3: bosons two sites apart are immobile.
  const LatticeSpec s3{12, 3, Boundary::periodic};
  double e = 1.0;
  const auto frozen = StateVector::basis_state(FockConfiguration::from_sites(12, {4, 6, 8}));
  CHECK(zeno_eigen_residual(s3, frozen, &e) == 0.0);
  CHECK(e == 0.0);
}
