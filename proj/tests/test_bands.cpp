#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "zeno/bands.hpp"
#include "zeno/flat_states.hpp"

using namespace zeno;
using std::numbers::pi;

namespace {

using Offsets = std::vector<int>;

std::set<Offsets> as_set(const InternalBasis& b) { return {b.states.begin(), b.states.end()}; }

std::vector<double> sorted_eigs(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

double max_abs_diff(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Two hard-core bosons on an n-site ring at cyclic distance 1..r-1, hopping
// J = 1 without ever reaching distance r. Written from pair lists alone.
std::vector<double> two_boson_ring_spectrum(int n, int r) {
  std::vector<std::pair<int, int>> states;
  for (int a = 0; a < n; ++a)
    for (int d = 1; d < r; ++d) states.emplace_back(a, (a + d) % n);
  auto find = [&](int a, int b) -> Eigen::Index {
    for (std::size_t i = 0; i < states.size(); ++i)
      if ((states[i].first == a && states[i].second == b) ||
          (states[i].first == b && states[i].second == a))
        return static_cast<Eigen::Index>(i);
    return -1;
  };
  const auto dim = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto [a, b] = states[static_cast<std::size_t>(i)];
    for (int which = 0; which < 2; ++which)
      for (int step : {-1, 1}) {
        int x = which == 0 ? a : b, y = which == 0 ? b : a;
        const int moved = ((x + step) % n + n) % n;
        if (moved == y) continue;
        const Eigen::Index k = find(moved, y);
        if (k >= 0) h(k, i) += 1.0;
      }
  }
  return sorted_eigs(h);
}

}  // namespace

TEST_CASE("internal state examples") {
  CHECK(as_set(enumerate_internal_states(3, 2, KindRequest::type_one)) ==
        std::set<Offsets>{{0, 1}, {0, 2}});
  CHECK(as_set(enumerate_internal_states(4, 2, KindRequest::automatic)) ==
        std::set<Offsets>{{0, 1}, {0, 2}, {0, 3}});
  const auto b = enumerate_internal_states(4, 4, KindRequest::type_two);
  CHECK(b.kind == ComplexKind::type_two);
  CHECK(as_set(b) ==
        std::set<Offsets>{{0, 3, 6, 9}, {0, 3, 6, 8}, {0, 3, 5, 8}, {0, 2, 5, 7}, {0, 2, 5, 8}});
  CHECK(enumerate_internal_states(5, 1, KindRequest::automatic).states.size() == 1);
}

TEST_CASE("internal bases are closed, distinct and Zeno valid") {
  for (auto [r, m, kind] : {std::tuple{3, 2, KindRequest::type_one}, {4, 2, KindRequest::type_one},
                            {6, 3, KindRequest::type_one}, {4, 4, KindRequest::type_two},
                            {4, 5, KindRequest::type_two}}) {
    CAPTURE(r);
    CAPTURE(m);
    const auto b = enumerate_internal_states(r, m, kind);
    const auto set = as_set(b);
    CHECK(set.size() == b.states.size());
    for (const auto& s : b.states) {
      CHECK(s.front() == 0);
      CHECK(std::is_sorted(s.begin(), s.end()));
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) CHECK(s[j] - s[i] != r);
    }
    // Each single hop of each state either breaks the constraint or lands on
    // a listed state after re-anchoring.
    for (const auto& s : b.states)
      for (std::size_t i = 0; i < s.size(); ++i)
        for (int step : {-1, 1}) {
          auto t = s;
          t[i] += step;
          if (std::count(t.begin(), t.end(), t[i]) > 1) continue;
          std::sort(t.begin(), t.end());
          bool pair = false;
          for (std::size_t a = 0; a < t.size(); ++a)
            for (std::size_t c = a + 1; c < t.size(); ++c) pair |= (t[c] - t[a] == r);
          if (pair) continue;
          const int base = t.front();
          for (int& x : t) x -= base;
          if (complex_kind(t, r) != b.kind) continue;
          bool split = false;
          for (std::size_t a = 0; a + 1 < t.size(); ++a) split |= (t[a + 1] - t[a] > r);
          if (split && b.kind == ComplexKind::type_one) continue;
          CHECK(set.count(t) == 1);
        }
  }
}

TEST_CASE("Bloch matrix examples") {
  const double q = 0.7;
  const std::complex<double> e(std::cos(q), std::sin(q));
  const auto m4 = build_bloch_matrix(enumerate_internal_states(4, 2, KindRequest::type_one), 1.0);
  const auto& st = m4.basis().states;
  REQUIRE(st.size() == 3);
  // Order the basis by extent so the matrix can be compared entrywise.
  std::vector<Eigen::Index> by_extent(3);
  for (Eigen::Index i = 0; i < 3; ++i) by_extent[static_cast<std::size_t>(st[static_cast<std::size_t>(i)].back() - 1)] = i;
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(3, 3);
  expect(0, 1) = 1.0 + std::conj(e);
  expect(1, 0) = 1.0 + e;
  expect(1, 2) = 1.0 + std::conj(e);
  expect(2, 1) = 1.0 + e;
  const auto h = m4.at(q);
  double diff = 0.0;
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = 0; b < 3; ++b)
      diff = std::max(diff, std::abs(h(by_extent[static_cast<std::size_t>(a)], by_extent[static_cast<std::size_t>(b)]) - expect(a, b)));
  CHECK(diff < 1e-14);

  const auto basis3 = enumerate_internal_states(3, 2, KindRequest::type_one);
  const auto m3 = build_bloch_matrix(basis3, 1.0);
  const auto h0 = m3.at(0.0);
  CHECK(std::abs(h0(0, 1)) == doctest::Approx(2.0));
  CHECK(max_abs_diff(sorted_eigs(h0), {-2.0, 2.0}) < 1e-14);

  const auto mv = build_bloch_matrix(basis3, 1.0, 1.0);
  const auto hv = mv.at(1.1);
  const auto hb = m3.at(1.1);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double expected = basis3.states[static_cast<std::size_t>(i)].back() == 1 ? 1.0 : 0.0;
    CHECK(std::abs(hv(i, i) - hb(i, i) - expected) < 1e-15);
  }
  CHECK(std::abs(hv(0, 1) - hb(0, 1)) < 1e-15);
}

// Hops change the summed boson position by one. For odd m an anchor shift
// flips that parity too, so the chiral partner of q sits at q + pi.
TEST_CASE("Bloch matrices are Hermitian, 2 pi periodic and chiral at V = 0") {
  std::vector<InternalBasis> cases;
  for (int r = 2; r <= 8; ++r) cases.push_back(enumerate_internal_states(r, 2, KindRequest::type_one));
  cases.push_back(enumerate_internal_states(6, 3, KindRequest::type_one));
  cases.push_back(enumerate_internal_states(5, 3, KindRequest::type_one));
  cases.push_back(enumerate_internal_states(8, 4, KindRequest::type_one));
  cases.push_back(enumerate_internal_states(4, 4, KindRequest::type_two));
  for (const auto& b : cases) {
    CAPTURE(b.R);
    CAPTURE(b.m);
    const auto bloch = build_bloch_matrix(b, 1.0);
    for (int k = 0; k < 32; ++k) {
      const double q = 2 * pi * k / 32 + 0.013;
      const auto h = bloch.at(q);
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      const auto ev = sorted_eigs(h);
      CHECK(max_abs_diff(ev, sorted_eigs(bloch.at(q + 2 * pi))) < 1e-12);
      auto neg = b.m % 2 == 0 ? ev : sorted_eigs(bloch.at(q + pi));
      for (double& x : neg) x = -x;
      CHECK(max_abs_diff(ev, neg) < 1e-10);
    }
  }
}

TEST_CASE("closed-form dispersions") {
  const int P = 256;
  SUBCASE("m = 2, R = 3") {
    const auto bs = compute_bands(build_bloch_matrix(enumerate_internal_states(3, 2, KindRequest::type_one), 1.0), P);
    REQUIRE(bs.bands.size() == 2);
    double d = 0.0;
    for (int k = 0; k < P; ++k) {
      const double c = 2 * std::abs(std::cos(bs.q_grid[static_cast<std::size_t>(k)] / 2));
      d = std::max({d, std::abs(bs.bands[0][static_cast<std::size_t>(k)] + c),
                    std::abs(bs.bands[1][static_cast<std::size_t>(k)] - c)});
    }
    CHECK(d < 1e-10);
    REQUIRE(bs.crossings.size() == 1);
    CHECK(bs.crossings[0].q == doctest::Approx(pi));
    CHECK(bs.flat_flags == std::vector<bool>{false, false});
    // Tracked bands follow the eigenvectors through the crossing.
    double tracked = 0.0;
    for (int k = 0; k < P; ++k) {
      const double c = 2 * std::cos(bs.q_grid[static_cast<std::size_t>(k)] / 2);
      tracked = std::max(tracked, std::min(std::abs(bs.tracked[0][static_cast<std::size_t>(k)] - c),
                                           std::abs(bs.tracked[0][static_cast<std::size_t>(k)] + c)));
    }
    CHECK(tracked < 1e-10);
    const auto s0 = bs.tracked[0][0] > 0 ? 1.0 : -1.0;
    CHECK(bs.tracked[0][P - 1] * s0 < 0);
  }
  SUBCASE("m = 2, R = 4") {
    const auto bs = compute_bands(build_bloch_matrix(enumerate_internal_states(4, 2, KindRequest::type_one), 1.0), P);
    REQUIRE(bs.bands.size() == 3);
    double d = 0.0;
    for (int k = 0; k < P; ++k) {
      const double c = 2 * std::sqrt(2.0) * std::abs(std::cos(bs.q_grid[static_cast<std::size_t>(k)] / 2));
      d = std::max({d, std::abs(bs.bands[0][static_cast<std::size_t>(k)] + c),
                    std::abs(bs.bands[1][static_cast<std::size_t>(k)]),
                    std::abs(bs.bands[2][static_cast<std::size_t>(k)] - c)});
    }
    CHECK(d < 1e-10);
    CHECK(bs.flat_flags == std::vector<bool>{false, true, false});
    CHECK(bs.flatness[1] < 1e-8);
  }
  SUBCASE("m = 4, R = 4, type II") {
    const auto bs = compute_bands(build_bloch_matrix(enumerate_internal_states(4, 4, KindRequest::type_two), 1.0), P);
    REQUIRE(bs.bands.size() == 5);
    double d = 0.0;
    for (int k = 0; k < P; ++k) {
      const double q = bs.q_grid[static_cast<std::size_t>(k)];
      const double s = std::sqrt(5 + 4 * std::cos(q));
      std::vector<double> expect{0.0};
      for (double eta : {-1.0, 1.0})
        for (double delta : {-1.0, 1.0}) expect.push_back(eta * std::sqrt(std::max(0.0, 3 + delta * s)));
      std::vector<double> got;
      for (const auto& band : bs.bands) got.push_back(band[static_cast<std::size_t>(k)]);
      d = std::max(d, max_abs_diff(got, expect));
    }
    CHECK(d < 1e-10);
    std::vector<double> at0;
    for (const auto& band : bs.bands) at0.push_back(band[0]);
    CHECK(max_abs_diff(at0, {-std::sqrt(6.0), 0.0, 0.0, 0.0, std::sqrt(6.0)}) < 1e-7);
    CHECK(bs.flat_flags[2]);
  }
}

TEST_CASE("flat band scan") {
  const auto rows2 = scan_flat_bands({2}, {2, 3, 4, 5, 6, 7, 8}, KindRequest::type_one);
  REQUIRE(rows2.size() == 7);
  for (const auto& row : rows2) {
    CAPTURE(row.R);
    CHECK(row.exists);
    CHECK(row.has_flat == (row.R % 2 == 0));
  }
  // R = m is a single frozen state; larger multiples need a real search.
  for (auto [m, r, flat] : {std::tuple{2, 2, true}, {3, 3, true}, {4, 4, true}, {2, 6, true},
                            {4, 8, true}, {3, 6, false}}) {
    CAPTURE(m);
    CAPTURE(r);
    const auto rows = scan_flat_bands({m}, {r}, KindRequest::type_one);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].has_flat == flat);
  }
  const auto r36 = scan_flat_bands({3}, {6}, KindRequest::type_one);
  CHECK(r36[0].basis_size == 10);
  CHECK(r36[0].min_flatness == doctest::Approx(0.349).epsilon(1e-2));
  const auto single = scan_flat_bands({1}, {2, 3, 4, 5}, KindRequest::type_one);
  for (const auto& row : single) {
    CHECK(row.basis_size == 1);
    CHECK_FALSE(row.has_flat);
  }
  const auto five = scan_flat_bands({5}, {4}, KindRequest::type_two);
  REQUIRE(five.size() == 1);
  CHECK(five[0].exists);
  CHECK(five[0].basis_size == 8);
  CHECK_FALSE(five[0].has_flat);
}

TEST_CASE("nearest-neighbour interaction") {
  const auto d3 = interaction_deformation(enumerate_internal_states(3, 2, KindRequest::type_one), 1.0, 1.0, 256);
  CHECK(d3.gap_at_crossing == doctest::Approx(1.0).epsilon(1e-12));
  const auto d3b = interaction_deformation(enumerate_internal_states(3, 2, KindRequest::type_one), 1.0, 0.4, 256);
  CHECK(d3b.gap_at_crossing == doctest::Approx(0.4).epsilon(1e-12));

  const auto d4 = interaction_deformation(enumerate_internal_states(4, 2, KindRequest::type_one), 1.0, 1.0, 256);
  CHECK(d4.flatness > 1e-3);
  CHECK(d4.flatness == doctest::Approx(0.484862).epsilon(1e-5));

  const auto b2 = enumerate_internal_states(4, 4, KindRequest::type_two);
  for (double v : {0.3, 1.0, 7.5}) {
    const auto d = interaction_deformation(b2, 1.0, v, 256);
    CHECK(d.max_shift < 1e-12);
  }
}

TEST_CASE("ring oracle examples") {
  const auto b3 = enumerate_internal_states(3, 2, KindRequest::type_one);
  const auto r3 = bloch_vs_ring_oracle(b3, 12, 1.0);
  CHECK(r3.pass);
  CHECK(r3.ring_dimension == 24);
  std::vector<double> expect;
  for (int k = 0; k < 12; ++k) {
    expect.push_back(2 * std::cos(pi * k / 12));
    expect.push_back(-2 * std::cos(pi * k / 12));
  }
  CHECK(max_abs_diff(two_boson_ring_spectrum(12, 3), expect) < 1e-10);

  const auto r4 = bloch_vs_ring_oracle(enumerate_internal_states(4, 2, KindRequest::type_one), 12, 1.0);
  CHECK(r4.pass);
  const auto s4 = two_boson_ring_spectrum(12, 4);
  // Twelve from the flat band, two more where the dispersive bands meet at q = pi.
  CHECK(std::count_if(s4.begin(), s4.end(), [](double x) { return std::abs(x) < 1e-10; }) == 14);

  const auto r2 = bloch_vs_ring_oracle(enumerate_internal_states(2, 2, KindRequest::type_one), 8, 1.0);
  CHECK(r2.pass);
  CHECK(r2.ring_dimension == 8);
  for (double x : two_boson_ring_spectrum(8, 2)) CHECK(std::abs(x) < 1e-12);

  for (double v : {0.0, 1.0}) {
    CHECK(bloch_vs_ring_oracle(b3, 12, 1.0, v).pass);
    const auto t2 = enumerate_internal_states(4, 4, KindRequest::type_two);
    CHECK(bloch_vs_ring_oracle(t2, 14, 1.0, v).pass);
    CHECK(bloch_vs_ring_oracle(t2, 16, 1.0, v).pass);
  }
  CHECK(bloch_vs_ring_oracle(enumerate_internal_states(6, 3, KindRequest::type_one), 12, 1.0, 1.0).pass);
  CHECK(bloch_vs_ring_oracle(enumerate_internal_states(8, 4, KindRequest::type_one), 16, 1.0).pass);
  for (int r = 2; r <= 6; ++r)
    for (int n : {2 * r + 4, 2 * r + 7}) {
      CAPTURE(r);
      CAPTURE(n);
      CHECK(bloch_vs_ring_oracle(enumerate_internal_states(r, 2, KindRequest::type_one), n, 1.0, 0.5).pass);
    }
}

TEST_CASE("type II ring component is too small on twelve sites") {
  const auto t2 = enumerate_internal_states(4, 4, KindRequest::type_two);
  const auto rep = bloch_vs_ring_oracle(t2, 12, 1.0);
  CHECK(rep.expected_dimension == 60);
  CHECK(rep.ring_dimension < rep.expected_dimension);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("flat bands carry compact null vectors on the ring") {
  for (int r : {2, 4, 6, 8}) {
    CAPTURE(r);
    const LatticeSpec spec{2 * r + 6, r, Boundary::periodic};
    for (int a : {0, 3}) {
      const auto psi = make_flat_state_I(spec, a);
      double e = 1.0;
      CHECK(zeno_eigen_residual(spec, psi, &e) < 1e-12);
      CHECK(std::abs(e) < 1e-12);
      // Support: two internal states at adjacent anchors at most.
      std::set<int> anchors;
      for (Code c : psi.codes) anchors.insert(FockConfiguration::from_code(c, spec.n_sites).occupied_sites().front());
      CHECK(anchors.size() <= static_cast<std::size_t>(r / 2));
    }
  }
  const LatticeSpec s16{16, 4, Boundary::periodic};
  const auto f2 = make_flat_state_II(s16, 2);
  double e = 1.0;
  CHECK(zeno_eigen_residual(s16, f2, &e) < 1e-12);
  CHECK(std::abs(e) < 1e-12);
  CHECK(f2.codes.size() == 2);
}

TEST_CASE("compute_bands argument checks") {
  const auto bloch = build_bloch_matrix(enumerate_internal_states(3, 2, KindRequest::type_one), 1.0);
  CHECK_THROWS_AS(compute_bands(bloch, 1), std::invalid_argument);
  CHECK_THROWS(enumerate_internal_states(3, 0, KindRequest::type_one));
}
