#pragma once

// Complex-double inner loops used by the master-equation and trajectory
// integrators. Every kernel has a scalar reference implementation; an AVX2/FMA
// variant is selected at runtime when the CPU supports it. Setting the
// environment variable ZENO_SIMD=scalar forces the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace zeno::kernels {

using cd = std::complex<double>;

struct KernelTable {
  std::string_view name;
  // y[i] += a * x[i]
  void (*caxpy)(cd a, const cd* x, cd* y, std::size_t n);
  // y[i] += (c + d[i]) * x[i]   (c, d real)
  void (*diag_axpy)(double c, const double* d, const cd* x, cd* y, std::size_t n);
  // sum |x[i]|^2
  double (*sq_norm)(const cd* x, std::size_t n);
  // sum conj(x[i]) * y[i]
  cd (*cdot)(const cd* x, const cd* y, std::size_t n);
  // max_i |e[i]| / (atol + rtol * max(|y0[i]|, |y1[i]|)), the integrator error norm
  double (*scaled_max_err)(const cd* e, const cd* y0, const cd* y1, double atol,
                           double rtol, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// Null when the running CPU (or the build) lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

// The table used by the library; chosen once on first call.
const KernelTable& active() noexcept;

inline void caxpy(cd a, std::span<const cd> x, std::span<cd> y) {
  active().caxpy(a, x.data(), y.data(), x.size());
}
inline void diag_axpy(double c, std::span<const double> d, std::span<const cd> x,
                      std::span<cd> y) {
  active().diag_axpy(c, d.data(), x.data(), y.data(), x.size());
}
inline double sq_norm(std::span<const cd> x) { return active().sq_norm(x.data(), x.size()); }
inline cd cdot(std::span<const cd> x, std::span<const cd> y) {
  return active().cdot(x.data(), y.data(), x.size());
}

}  // namespace zeno::kernels
