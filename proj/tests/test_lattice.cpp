#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "zeno/lattice.hpp"

using namespace zeno;

namespace {

FockConfiguration cfg(const char* s) { return FockConfiguration::from_string(s); }

std::uint64_t brute_count(int n, int r, bool periodic) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < (std::size_t{1} << n); ++i)
    if (!oracle::has_pair(oracle::occupations(n, i), r, periodic)) ++c;
  return c;
}

}  // namespace

TEST_CASE("is_zeno_state examples") {
  const LatticeSpec s{6, 3, Boundary::periodic};
  CHECK(is_zeno_state(cfg("110000"), s));
  CHECK_FALSE(is_zeno_state(cfg("100100"), s));
  CHECK(is_zeno_state(cfg("000000"), s));
  CHECK_THROWS_AS(is_zeno_state(cfg("11000"), s), std::invalid_argument);
}

TEST_CASE("count_zeno_states examples") {
  CHECK(count_zeno_states({6, 3, Boundary::periodic}) == 27);
  CHECK(count_zeno_states({6, 2, Boundary::periodic}) == 16);
  CHECK(count_zeno_states({1, 1, Boundary::open}) == 2);
  CHECK(count_zeno_states({1, 7, Boundary::open}) == 2);
  CHECK_THROWS_AS(count_zeno_states({25, 3, Boundary::periodic}), CapExceeded);
  CHECK_THROWS_AS(count_zeno_states({4, 4, Boundary::periodic}), std::invalid_argument);
}

TEST_CASE("count_zeno_states agrees with brute-force distance enumeration") {
  for (int n = 1; n <= 12; ++n)
    for (int r = 1; r <= n + 1; ++r) {
      CAPTURE(n);
      CAPTURE(r);
      CHECK(count_zeno_states({n, r, Boundary::open}) == brute_count(n, r, false));
      if (r < n) CHECK(count_zeno_states({n, r, Boundary::periodic}) == brute_count(n, r, true));
    }
}

TEST_CASE("code and configuration predicates agree") {
  for (int n : {5, 8, 9})
    for (int r = 1; r < n; ++r)
      for (auto b : {Boundary::open, Boundary::periodic}) {
        const LatticeSpec s{n, r, b};
        for (Code c = 0; c < (Code{1} << n); ++c)
          REQUIRE(is_zeno_code(c, s) == is_zeno_state(FockConfiguration::from_code(c, n), s));
      }
}

TEST_CASE("zeno projector is idempotent") {
  const LatticeSpec s{8, 3, Boundary::periodic};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(256), mask(256);
  for (int i = 0; i < 256; ++i) {
    v[i] = g(rng);
    mask[i] = is_zeno_code(static_cast<Code>(i), s) ? 1.0 : 0.0;
  }
  const Eigen::VectorXd once = mask.cwiseProduct(v);
  CHECK((mask.cwiseProduct(once) - once).norm() == 0.0);
}

TEST_CASE("count is invariant under cyclic relabeling") {
  // Relabeling maps the Zeno set onto itself, so the count of rotated codes
  // that pass the predicate equals the count itself.
  for (int n : {7, 10})
    for (int r = 1; r < n; ++r) {
      const LatticeSpec s{n, r, Boundary::periodic};
      const auto total = count_zeno_states(s);
      for (int shift = 1; shift < n; ++shift) {
        std::uint64_t rotated = 0;
        for (Code c = 0; c < (Code{1} << n); ++c) {
          if (!is_zeno_code(c, s)) continue;
          auto occ = FockConfiguration::from_code(c, n).occupied_sites();
          for (int& j : occ) j = (j + shift) % n;
          if (is_zeno_state(FockConfiguration::from_sites(n, occ), s)) ++rotated;
        }
        CHECK(rotated == total);
      }
    }
}

TEST_CASE("enumerate_zeno_basis examples") {
  auto strings = [](const std::vector<FockConfiguration>& v) {
    std::vector<std::string> out;
    for (const auto& c : v) out.push_back(c.to_string());
    return out;
  };
  CHECK(strings(enumerate_zeno_basis({4, 2, Boundary::open}, 2)) ==
        std::vector<std::string>{"0011", "0110", "1001", "1100"});
  CHECK(strings(enumerate_zeno_basis({3, 1, Boundary::open}, 2)) == std::vector<std::string>{"101"});
  CHECK(enumerate_zeno_basis({4, 3, Boundary::periodic}, 4).empty());
  CHECK_THROWS_AS(enumerate_zeno_basis({4, 2, Boundary::open}, 5), std::invalid_argument);

  // Sizes sum to the total count, in lexicographic order.
  const LatticeSpec s{10, 3, Boundary::periodic};
  std::uint64_t sum = 0;
  for (int m = 0; m <= 10; ++m) {
    const auto b = enumerate_zeno_basis(s, m);
    CHECK(std::is_sorted(b.begin(), b.end()));
    sum += b.size();
  }
  CHECK(sum == count_zeno_states(s));
}

TEST_CASE("classify_complexes examples") {
  const LatticeSpec s8{8, 3, Boundary::periodic};
  auto one = classify_complexes(FockConfiguration::from_sites(8, {0, 1}), s8);
  REQUIRE(one.size() == 1);
  CHECK(one[0].kind == ComplexKind::type_one);
  CHECK(one[0].boson_count == 2);
  CHECK(one[0].extent == 1);

  const LatticeSpec s9{9, 3, Boundary::periodic};
  auto two = classify_complexes(FockConfiguration::from_sites(9, {0, 2, 4}), s9);
  REQUIRE(two.size() == 1);
  CHECK(two[0].kind == ComplexKind::type_two);
  CHECK(two[0].boson_count == 3);
  CHECK(two[0].extent == 4);

  const LatticeSpec s40{40, 3, Boundary::periodic};
  auto free = classify_complexes(FockConfiguration::from_sites(40, {0, 10}), s40);
  REQUIRE(free.size() == 2);
  for (const auto& c : free) CHECK(c.kind == ComplexKind::free);

  // A cluster across the periodic seam keeps its anchor at the left end.
  auto seam = classify_complexes(FockConfiguration::from_sites(8, {0, 7}), s8);
  REQUIRE(seam.size() == 1);
  CHECK(seam[0].anchor == 7);
  CHECK(seam[0].extent == 1);

  CHECK_THROWS_AS(classify_complexes(FockConfiguration::from_sites(8, {0, 3}), s8), std::invalid_argument);
}

TEST_CASE("classify_complexes partitions sites and never returns extent R") {
  std::mt19937_64 rng(11);
  for (auto b : {Boundary::periodic, Boundary::open})
    for (int r : {2, 3, 4}) {
      const LatticeSpec s{14, r, b};
      for (int trial = 0; trial < 400; ++trial) {
        const Code c = static_cast<Code>(rng() & ((Code{1} << 14) - 1));
        if (!is_zeno_code(c, s)) continue;
        const auto config = FockConfiguration::from_code(c, 14);
        std::vector<int> covered;
        for (const auto& cx : classify_complexes(config, s)) {
          CHECK(cx.offsets.front() == 0);
          CHECK(cx.boson_count == static_cast<int>(cx.offsets.size()));
          CHECK(cx.extent != r);
          if (cx.boson_count == 1) CHECK(cx.kind == ComplexKind::free);
          for (std::size_t k = 1; k < cx.offsets.size(); ++k) CHECK(cx.offsets[k] - cx.offsets[k - 1] < r);
          for (int o : cx.offsets) covered.push_back(s.site(cx.anchor + o));
        }
        std::sort(covered.begin(), covered.end());
        CHECK(covered == config.occupied_sites());
      }
    }
}

TEST_CASE("loss channels") {
  CHECK(LatticeSpec{4, 2, Boundary::open}.loss_channels().size() == 2);
  CHECK(LatticeSpec{6, 3, Boundary::periodic}.loss_channels().size() == 6);
  CHECK(LatticeSpec{3, 5, Boundary::open}.loss_channels().empty());
  CHECK(parse_boundary("open") == Boundary::open);
  CHECK_THROWS_AS(parse_boundary("twisted"), std::invalid_argument);
}
