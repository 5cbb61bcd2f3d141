#pragma once

// Dormand-Prince 5(4) stepping for Eigen-valued states.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "magnus/error.hpp"
#include "magnus/ode.hpp"

namespace magnus::detail {

template <class State>
class Dopri5 {
 public:
  using Rhs = std::function<State(double, const State&)>;

  explicit Dopri5(double tol) : tol_(tol) {}

  /// Advances y from t0 to exactly t1 > t0. h carries the step proposal
  /// between calls (0 requests an initial guess).
  void advance(const Rhs& f, double t0, double t1, State& y, double& h, StepStats& stats) const {
    if (!(t1 > t0)) return;
    double t = t0;
    State k1 = f(t, y);
    if (h <= 0) h = initial_step(y, k1, t1 - t0);
    bool rejected_last = false;
    while (t < t1) {
      const double min_step = 1e-13 * std::max(1.0, std::abs(t));
      if (h < min_step) throw StepUnderflow("step size underflow at t = " + std::to_string(t));
      const bool last = t + h >= t1 - 1e-14 * std::max(1.0, std::abs(t1));
      const double step = last ? t1 - t : h;

      const State k2 = f(t + c2 * step, y + step * (a21 * k1));
      const State k3 = f(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
      const State k4 = f(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 = f(last ? t1 : t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const State y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const double t_new = last ? t1 : t + step;
      const State k7 = f(t_new, y_new);
      const State e = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const auto scale = tol_ + tol_ * y.array().abs().max(y_new.array().abs());
      if (!y_new.allFinite()) throw NumericError("non-finite state in Runge-Kutta step");
      // A tiny tol can overflow the ratio while the state is fine; that is a rejection.
      double err = std::sqrt((e.array().abs() / scale).square().mean());
      if (std::isnan(err)) err = std::numeric_limits<double>::infinity();

      double factor = err == 0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      if (err <= 1.0) {
        ++stats.accepted;
        stats.max_error = std::max(stats.max_error, err);
        t = t_new;
        y = y_new;
        k1 = k7;
        factor = std::clamp(factor, 0.2, rejected_last ? 1.0 : 5.0);
        // A landing step may be much shorter than the proposal; keep the proposal.
        h = last ? std::max(h, step * factor) : step * factor;
        rejected_last = false;
      } else {
        ++stats.rejected;
        h = step * std::clamp(factor, 0.2, 1.0);
        rejected_last = true;
      }
    }
  }

 private:
  static double initial_step(const State& y, const State& dy, double span) {
    const double d0 = std::sqrt(y.array().abs().square().mean());
    const double d1 = std::sqrt(dy.array().abs().square().mean());
    const double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-3 : 0.01 * d0 / d1;
    return std::min(h, span);
  }

  double tol_;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // fifth minus embedded fourth order weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace magnus::detail
