#pragma once

// Closed-form trajectories (polynomial plus sinusoids per axis) and their exact
// derivative stacks. This is the reference path the spline estimates and the
// invariance checks are measured against.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stdadi/errors.hpp"
#include "stdadi/spline.hpp"

namespace stdadi {

/// amplitude * sin(frequency * t + phase)
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
};

/// One coordinate of a closed-form trajectory: sum_k coefficients[k] t^k plus a
/// sum of sinusoids.
struct ScalarSignal {
  std::vector<double> coefficients;
  std::vector<Sinusoid> waves;

  double derivative(double t, int order) const {
    double value = 0.0;
    const int degree = static_cast<int>(coefficients.size()) - 1;
    // Horner on the order-th derivative: a_m * m!/(m-order)! t^(m-order)
    for (int m = degree; m >= order; --m) {
      double falling = 1.0;
      for (int q = 0; q < order; ++q) falling *= static_cast<double>(m - q);
      value = value * t + coefficients[static_cast<std::size_t>(m)] * falling;
    }
    for (const auto& w : waves) {
      const double arg = w.frequency * t + w.phase;
      const double gain = w.amplitude * std::pow(w.frequency, order);
      switch (order % 4) {
        case 0: value += gain * std::sin(arg); break;
        case 1: value += gain * std::cos(arg); break;
        case 2: value -= gain * std::sin(arg); break;
        default: value -= gain * std::cos(arg); break;
      }
    }
    return value;
  }

  double operator()(double t) const { return derivative(t, 0); }
};

struct ClosedFormTrajectory {
  std::array<ScalarSignal, 3> axes;

  Vec3 derivative(double t, int order) const {
    return {axes[0].derivative(t, order), axes[1].derivative(t, order), axes[2].derivative(t, order)};
  }
  Vec3 operator()(double t) const { return derivative(t, 0); }
};

/// Uniform grid start + i * step for i in [0, count).
struct SampleGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
};

/// Throws UnsupportedModel if the model cannot be evaluated exactly in
/// closed form (non-finite coefficients or wave parameters).
inline void validate_model(const ClosedFormTrajectory& model) {
  for (const auto& axis : model.axes) {
    for (double a : axis.coefficients) {
      if (!std::isfinite(a)) throw UnsupportedModel("polynomial coefficient is not finite");
    }
    for (const auto& w : axis.waves) {
      if (!std::isfinite(w.amplitude) || !std::isfinite(w.frequency) || !std::isfinite(w.phase)) {
        throw UnsupportedModel("sinusoid parameters are not finite");
      }
    }
  }
}

inline JointTrajectory sample(const ClosedFormTrajectory& model, const SampleGrid& grid) {
  JointTrajectory traj;
  traj.dt = grid.step;
  traj.samples.reserve(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) traj.samples.push_back(model(grid.at(i)));
  return traj;
}

/// Exact derivatives 0..4 on the grid, centered (and optionally normalized)
/// the same way fit_and_differentiate does.
inline DerivativeStack differentiate_analytic(const ClosedFormTrajectory& model, const SampleGrid& grid,
                                              const DifferentiationOptions& options = {}) {
  validate_model(model);
  if (grid.count == 0) throw TrajectoryError("empty sample grid");
  DerivativeStack stack;
  stack.frames.resize(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double t = grid.at(i);
    for (int k = 0; k <= kMaxDerivativeOrder; ++k) stack[i].col(k) = model.derivative(t, k);
  }
  center_positions(stack);
  if (options.normalize) normalize_scale(stack);
  return stack;
}

}  // namespace stdadi
