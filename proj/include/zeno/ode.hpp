#pragma once

// Adaptive Dormand-Prince 5(4) integrator over flat state arrays.
// T is double or std::complex<double>; complex states route their linear
// combinations through the SIMD kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zeno/kernels.hpp"
#include "zeno/lattice.hpp"

namespace zeno {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double safety = 0.9;
  double initial_step = 0.0;  // 0: estimated from the first derivative
  double min_step = 1e-13;
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

namespace detail {

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}
inline void axpy(double a, std::span<const std::complex<double>> x,
                 std::span<std::complex<double>> y) {
  kernels::caxpy({a, 0.0}, x, y);
}
inline double err_norm(std::span<const double> e, std::span<const double> y0,
                       std::span<const double> y1, double atol, double rtol) {
  double m = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    m = std::max(m, std::abs(e[i]) / (atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]))));
  return m;
}
inline double err_norm(std::span<const std::complex<double>> e,
                       std::span<const std::complex<double>> y0,
                       std::span<const std::complex<double>> y1, double atol, double rtol) {
  return kernels::active().scaled_max_err(e.data(), y0.data(), y1.data(), atol, rtol, e.size());
}

}  // namespace detail

template <class T>
class DormandPrince {
 public:
  using State = std::vector<T>;
  using Rhs = std::function<void(double t, std::span<const T> y, std::span<T> dy)>;

  DormandPrince(Rhs rhs, OdeOptions opts = {}) : rhs_(std::move(rhs)), opts_(opts) {}

  const OdeStats& stats() const noexcept { return stats_; }
  double last_step() const noexcept { return h_; }

  // One accepted adaptive step that never goes past t_limit.
  void step(double& t, State& y, double t_limit) {
    ensure_size(y.size());
    if (h_ <= 0.0) h_ = initial_step(t, y);
    if (!fsal_valid_) {
      call_rhs(t, y, k_[0]);
      fsal_valid_ = true;
    }
    for (;;) {
      const double remaining = t_limit - t;
      bool clipped = false;
      double h = h_;
      if (h >= remaining) {
        h = remaining;
        clipped = true;
      }
      if (h < opts_.min_step && !clipped)
        throw NumericalError("step size underflow at t=" + std::to_string(t) +
                             " (error estimate " + std::to_string(last_err_) + ")");
      const double err = trial(t, y, h);
      last_err_ = err;
      if (err <= 1.0) {
        ++stats_.accepted;
        if (stats_.accepted + stats_.rejected > opts_.max_steps)
          throw NumericalError("integrator step budget exhausted");
        t = clipped ? t_limit : t + h;
        y.swap(ynew_);
        std::swap(k_[0], k_[6]);  // first-same-as-last
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, opts_.safety * std::pow(err, -0.2));
        if (!clipped || h >= h_) h_ = h * std::max(0.2, grow);
        return;
      }
      ++stats_.rejected;
      h_ = h * std::max(0.1, opts_.safety * std::pow(err, -0.2));
    }
  }

  // Integrates from t to t_end.
  void advance(double& t, State& y, double t_end) {
    while (t < t_end) step(t, y, t_end);
  }

  // A single unchecked step of exactly h from (t, y); used to bisect event times.
  void step_exact(double t, const State& y, double h, State& out) {
    ensure_size(y.size());
    State k0(y.size());
    call_rhs(t, y, k0);
    std::swap(k_[0], k0);
    trial(t, y, h);
    std::swap(k_[0], k0);
    out = ynew_;
  }

  // Forget cached derivatives (call after modifying the state externally).
  void reset() noexcept {
    fsal_valid_ = false;
  }

 private:
  void ensure_size(std::size_t n) {
    if (ynew_.size() == n) return;
    for (auto& k : k_) k.assign(n, T{});
    ynew_.assign(n, T{});
    ytmp_.assign(n, T{});
    err_.assign(n, T{});
    fsal_valid_ = false;
  }

  void call_rhs(double t, std::span<const T> y, std::span<T> dy) {
    ++stats_.rhs_calls;
    rhs_(t, y, dy);
  }

  double initial_step(double t, const State& y) {
    if (opts_.initial_step > 0.0) return opts_.initial_step;
    State dy(y.size());
    call_rhs(t, y, dy);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double sc = opts_.atol + opts_.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(dy[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::max(h, 1e-10);
  }

  // Fills ynew_ and k_[6]; returns the scaled error.
  double trial(double t, const State& y, double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto combo = [&](State& out, std::initializer_list<std::pair<double, int>> terms) {
      std::copy(y.begin(), y.end(), out.begin());
      for (auto [a, idx] : terms)
        if (a != 0.0) detail::axpy(h * a, std::span<const T>(k_[idx]), std::span<T>(out));
    };

    combo(ytmp_, {{a21, 0}});
    call_rhs(t + c2 * h, ytmp_, k_[1]);
    combo(ytmp_, {{a31, 0}, {a32, 1}});
    call_rhs(t + c3 * h, ytmp_, k_[2]);
    combo(ytmp_, {{a41, 0}, {a42, 1}, {a43, 2}});
    call_rhs(t + c4 * h, ytmp_, k_[3]);
    combo(ytmp_, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
    call_rhs(t + c5 * h, ytmp_, k_[4]);
    combo(ytmp_, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
    call_rhs(t + h, ytmp_, k_[5]);
    combo(ynew_, {{b1, 0}, {b3, 2}, {b4, 3}, {b5, 4}, {b6, 5}});
    call_rhs(t + h, ynew_, k_[6]);

    std::fill(err_.begin(), err_.end(), T{});
    const std::pair<double, int> et[] = {{e1, 0}, {e3, 2}, {e4, 3}, {e5, 4}, {e6, 5}, {e7, 6}};
    for (auto [a, idx] : et) detail::axpy(h * a, std::span<const T>(k_[idx]), std::span<T>(err_));
    return detail::err_norm(std::span<const T>(err_), std::span<const T>(y),
                            std::span<const T>(ynew_), opts_.atol, opts_.rtol);
  }

  Rhs rhs_;
  OdeOptions opts_;
  OdeStats stats_;
  double h_ = 0.0;
  double last_err_ = 0.0;
  bool fsal_valid_ = false;
  State k_[7];
  State ynew_, ytmp_, err_;
};

}  // namespace zeno
