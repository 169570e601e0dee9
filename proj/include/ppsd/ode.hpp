#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "ppsd/core.hpp"

namespace ppsd {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  ///< 0 selects a step from the derivative scale
  long max_steps = 50'000'000;
};

/**
 * Dormand-Prince 5(4) integrator over dense Eigen states.
 *
 * The accept callback runs after every accepted step and may modify the
 * state in place (re-symmetrization, renormalization), so the first stage is
 * re-evaluated each step instead of reusing the last one.
 */
template <class State>
class DormandPrince {
 public:
  using Rhs = std::function<State(double, const State&)>;

  DormandPrince(Rhs rhs, OdeOptions options) : rhs_(std::move(rhs)), opt_(options), h_(options.initial_step) {}

  template <class OnAccept>
  void advance(State& y, double& t, double t_end, OnAccept&& on_accept) {
    if (t_end <= t) return;
    if (h_ <= 0.0) h_ = initial_step(y, t, t_end);

    while (t < t_end) {
      if (++steps_ > opt_.max_steps) throw IntegrationError("DormandPrince: step budget exhausted");
      bool last = false;
      double h = h_;
      if (t + h >= t_end || t + 1.01 * h >= t_end) {
        h = t_end - t;
        last = true;
      }

      const State k1 = rhs_(t, y);
      const State k2 = rhs_(t + c2 * h, State(y + h * (a21 * k1)));
      const State k3 = rhs_(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
      const State k4 = rhs_(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
      const State k5 = rhs_(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
      const State k6 =
          rhs_(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
      State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = rhs_(t + h, y_new);
      const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double en = error_norm(err, y, y_new);
      if (!std::isfinite(en)) throw IntegrationError("DormandPrince: non-finite error estimate");

      if (en <= 1.0) {
        t = last ? t_end : t + h;
        y = std::move(y_new);
        on_accept(t, y);
        const double grow = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        if (!last) h_ = h * grow;
        else h_ = std::max(h_, h);
      } else {
        h_ = h * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 1.0);
        if (h_ < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
          throw IntegrationError("DormandPrince: step size underflow at t=" + std::to_string(t));
        }
      }
    }
  }

  long steps() const { return steps_; }

 private:
  double error_norm(const State& err, const State& y0, const State& y1) const {
    const auto scale = opt_.atol + opt_.rtol * y0.array().abs().max(y1.array().abs());
    return std::sqrt((err.array().abs() / scale).square().mean());
  }

  double initial_step(const State& y, double t, double t_end) const {
    const State f0 = rhs_(t, y);
    const auto scale = opt_.atol + opt_.rtol * y.array().abs();
    const double d0 = std::sqrt((y.array().abs() / scale).square().mean());
    const double d1 = std::sqrt((f0.array().abs() / scale).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t);
    const State f1 = rhs_(t + h0, State(y + h0 * f0));
    const double d2 = std::sqrt(((f1 - f0).array().abs() / scale).square().mean()) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100 * h0, h1, t_end - t});
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Rhs rhs_;
  OdeOptions opt_;
  double h_;
  long steps_ = 0;
};

}  // namespace ppsd
