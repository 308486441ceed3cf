#include "zeno/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(_M_X64)
#define ZENO_HAVE_X86 1
#include <immintrin.h>
#endif

namespace zeno::kernels {
namespace {

// ---------------------------------------------------------------------------
// scalar reference

void caxpy_scalar(cd a, const cd* x, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void diag_axpy_scalar(double c, const double* d, const cd* x, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += (c + d[i]) * x[i];
}

double sq_norm_scalar(const cd* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
  return s;
}

cd cdot_scalar(const cd* x, const cd* y, std::size_t n) {
  cd s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double scaled_max_err_scalar(const cd* e, const cd* y0, const cd* y1, double atol,
                             double rtol, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    m = std::max(m, std::abs(e[i]) / scale);
  }
  return m;
}

const KernelTable kScalar{"scalar",        caxpy_scalar,          diag_axpy_scalar,
                          sq_norm_scalar,  cdot_scalar,           scaled_max_err_scalar};

// ---------------------------------------------------------------------------
// AVX2 + FMA. Complex values are interleaved (re, im), two per 256-bit lane.

#ifdef ZENO_HAVE_X86

#define ZENO_AVX2 __attribute__((target("avx2,fma")))

ZENO_AVX2 void caxpy_avx2(cd a, const cd* x, cd* y, std::size_t n) {
  const auto* xs = reinterpret_cast<const double*>(x);
  auto* ys = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
    const __m256d xsw = _mm256_permute_pd(xv, 0b0101);
    // even lanes: ar*xr - ai*xi ; odd lanes: ar*xi + ai*xr
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xsw));
    _mm256_storeu_pd(ys + 2 * i, _mm256_add_pd(_mm256_loadu_pd(ys + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

ZENO_AVX2 void diag_axpy_avx2(double c, const double* d, const cd* x, cd* y,
                              std::size_t n) {
  const auto* xs = reinterpret_cast<const double*>(x);
  auto* ys = reinterpret_cast<double*>(y);
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // (d0, d0, d1, d1)
    const __m128d dd = _mm_loadu_pd(d + i);
    const __m256d dv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(dd), 0b01010000);
    const __m256d scale = _mm256_add_pd(cv, dv);
    const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
    _mm256_storeu_pd(ys + 2 * i, _mm256_fmadd_pd(scale, xv, _mm256_loadu_pd(ys + 2 * i)));
  }
  for (; i < n; ++i) y[i] += (c + d[i]) * x[i];
}

ZENO_AVX2 double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

ZENO_AVX2 double sq_norm_avx2(const cd* x, std::size_t n) {
  const auto* xs = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
    acc = _mm256_fmadd_pd(xv, xv, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::norm(x[i]);
  return s;
}

ZENO_AVX2 cd cdot_avx2(const cd* x, const cd* y, std::size_t n) {
  const auto* xs = reinterpret_cast<const double*>(x);
  const auto* ys = reinterpret_cast<const double*>(y);
  // conj(x) y = (xr yr + xi yi) + i (xr yi - xi yr)
  __m256d re = _mm256_setzero_pd();
  __m256d im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
    const __m256d yv = _mm256_loadu_pd(ys + 2 * i);
    re = _mm256_fmadd_pd(xv, yv, re);
    // (xr*yi, xi*yr) per complex
    im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), im);
  }
  alignas(32) double r[4];
  alignas(32) double m[4];
  _mm256_store_pd(r, re);
  _mm256_store_pd(m, im);
  cd s{r[0] + r[1] + r[2] + r[3], (m[0] - m[1]) + (m[2] - m[3])};
  for (; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

ZENO_AVX2 double scaled_max_err_avx2(const cd* e, const cd* y0, const cd* y1, double atol,
                                     double rtol, std::size_t n) {
  // Magnitudes need a per-complex sqrt; process two complexes per vector.
  const auto* es = reinterpret_cast<const double*>(e);
  const auto* as = reinterpret_cast<const double*>(y0);
  const auto* bs = reinterpret_cast<const double*>(y1);
  const __m256d atolv = _mm256_set1_pd(atol);
  const __m256d rtolv = _mm256_set1_pd(rtol);
  __m256d mx = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d ev = _mm256_loadu_pd(es + 2 * i);
    const __m256d av = _mm256_loadu_pd(as + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bs + 2 * i);
    // |z|^2 broadcast to both lanes of each complex
    const __m256d e2 = _mm256_hadd_pd(_mm256_mul_pd(ev, ev), _mm256_mul_pd(ev, ev));
    const __m256d a2 = _mm256_hadd_pd(_mm256_mul_pd(av, av), _mm256_mul_pd(av, av));
    const __m256d b2 = _mm256_hadd_pd(_mm256_mul_pd(bv, bv), _mm256_mul_pd(bv, bv));
    const __m256d scale =
        _mm256_fmadd_pd(rtolv, _mm256_sqrt_pd(_mm256_max_pd(a2, b2)), atolv);
    mx = _mm256_max_pd(mx, _mm256_div_pd(_mm256_sqrt_pd(e2), scale));
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, mx);
  double m = std::max(std::max(buf[0], buf[1]), std::max(buf[2], buf[3]));
  if (i < n) m = std::max(m, scaled_max_err_scalar(e + i, y0 + i, y1 + i, atol, rtol, n - i));
  return m;
}

const KernelTable kAvx2{"avx2",       caxpy_avx2, diag_axpy_avx2,
                        sq_norm_avx2, cdot_avx2,  scaled_max_err_avx2};

bool cpu_has_avx2() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#endif  // ZENO_HAVE_X86

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#ifdef ZENO_HAVE_X86
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* env = std::getenv("ZENO_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
    if (const KernelTable* t = avx2_table()) return *t;
    return kScalar;
  }();
  return table;
}

}  // namespace zeno::kernels
