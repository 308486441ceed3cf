#include <doctest.h>

#include <random>
#include <vector>

#include "zeno/kernels.hpp"

using namespace zeno::kernels;

namespace {

std::vector<cd> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cd> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

}  // namespace

TEST_CASE("scalar and AVX2 kernels agree") {
  const KernelTable* simd = avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 not available on this CPU; only the scalar path is exercised");
    return;
  }
  const KernelTable& ref = scalar_table();
  std::mt19937_64 rng(42);
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 16u, 33u, 1001u}) {
    CAPTURE(n);
    const auto x = random_vector(n, rng);
    const auto y0 = random_vector(n, rng);
    std::vector<double> d(n);
    std::uniform_real_distribution<double> u(-2, 2);
    for (auto& v : d) v = u(rng);
    const cd a{0.3, -1.7};

    auto y1 = y0, y2 = y0;
    ref.caxpy(a, x.data(), y1.data(), n);
    simd->caxpy(a, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (1 + std::abs(y1[i])));

    y1 = y0;
    y2 = y0;
    ref.diag_axpy(0.7, d.data(), x.data(), y1.data(), n);
    simd->diag_axpy(0.7, d.data(), x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (1 + std::abs(y1[i])));

    const double s1 = ref.sq_norm(x.data(), n), s2 = simd->sq_norm(x.data(), n);
    CHECK(s2 == doctest::Approx(s1).epsilon(1e-13));

    const cd c1 = ref.cdot(x.data(), y0.data(), n), c2 = simd->cdot(x.data(), y0.data(), n);
    CHECK(std::abs(c1 - c2) <= 1e-12 * (1 + std::abs(c1)));

    const double e1 = ref.scaled_max_err(x.data(), y0.data(), y1.data(), 1e-10, 1e-8, n);
    const double e2 = simd->scaled_max_err(x.data(), y0.data(), y1.data(), 1e-10, 1e-8, n);
    CHECK(e2 == doctest::Approx(e1).epsilon(1e-13));
  }
}

TEST_CASE("scalar kernels match direct loops") {
  const KernelTable& ref = scalar_table();
  const std::vector<cd> x{{1, 2}, {3, -1}, {0, 0.5}};
  std::vector<cd> y{{1, 0}, {0, 1}, {2, 2}};
  ref.caxpy({0, 1}, x.data(), y.data(), 3);
  CHECK(y[0] == cd(-1, 1));
  CHECK(y[1] == cd(1, 4));
  CHECK(y[2] == cd(1.5, 2));
  CHECK(ref.sq_norm(x.data(), 3) == doctest::Approx(15.25));
  const cd dot = ref.cdot(x.data(), x.data(), 3);
  CHECK(dot.real() == doctest::Approx(15.25));
  CHECK(dot.imag() == doctest::Approx(0.0));
}

TEST_CASE("active table is one of the two") {
  const auto name = active().name;
  CHECK((name == "scalar" || name == "avx2"));
}
