#pragma once

// Spatio-temporal dual affine transformations g(u) = A f(t) + T, u = (t - d) / c.

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "stdadi/analytic.hpp"
#include "stdadi/spline.hpp"

namespace stdadi {

inline constexpr double kMinAbsDeterminant = 1e-6;

using Mat3 = Eigen::Matrix3d;

class DualAffine {
 public:
  DualAffine() : DualAffine(Mat3::Identity(), Vec3::Zero(), 1.0, 0.0) {}

  DualAffine(const Mat3& linear, const Vec3& translation, double time_scale, double time_shift)
      : linear_(linear), translation_(translation), time_scale_(time_scale), time_shift_(time_shift) {
    if (!linear_.allFinite() || !translation_.allFinite() || !std::isfinite(time_shift_)) {
      throw std::invalid_argument("dual affine parameters must be finite");
    }
    if (!(std::abs(linear_.determinant()) >= kMinAbsDeterminant)) {
      throw std::invalid_argument("spatial part is singular (|det A| < 1e-6)");
    }
    if (!(time_scale_ > 0.0) || !std::isfinite(time_scale_)) {
      throw std::invalid_argument("time scale c must be finite and positive");
    }
  }

  static DualAffine identity() { return {}; }

  const Mat3& linear() const noexcept { return linear_; }
  const Vec3& translation() const noexcept { return translation_; }
  double time_scale() const noexcept { return time_scale_; }
  double time_shift() const noexcept { return time_shift_; }

  /// u = (t - d) / c
  double to_transformed_time(double t) const { return (t - time_shift_) / time_scale_; }
  /// t = c u + d
  double to_original_time(double u) const { return time_scale_ * u + time_shift_; }

  Vec3 apply_point(const Vec3& p) const { return linear_ * p + translation_; }

  /// Grid in transformed time whose points correspond one-to-one with `grid`.
  SampleGrid transformed_grid(const SampleGrid& grid) const {
    return {to_transformed_time(grid.start), grid.step / time_scale_, grid.count};
  }

 private:
  Mat3 linear_;
  Vec3 translation_;
  double time_scale_;
  double time_shift_;
};

/// Applies `first`, then `second`.
inline DualAffine compose(const DualAffine& second, const DualAffine& first) {
  return {second.linear() * first.linear(), second.linear() * first.translation() + second.translation(),
          first.time_scale() * second.time_scale(), first.time_scale() * second.time_shift() + first.time_shift()};
}

namespace detail {

// Coefficients of p(c u + d) as a polynomial in u.
inline std::vector<double> substitute_affine(const std::vector<double>& coefficients, double c, double d) {
  std::vector<double> out(coefficients.size(), 0.0);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    double binomial = 1.0;
    for (std::size_t m = 0; m <= k; ++m) {
      if (m > 0) binomial = binomial * static_cast<double>(k - m + 1) / static_cast<double>(m);
      out[m] += coefficients[k] * binomial * std::pow(c, static_cast<double>(m)) *
                std::pow(d, static_cast<double>(k - m));
    }
  }
  return out;
}

}  // namespace detail

/// Closed form of g(u) = A f(c u + d) + T.
inline ClosedFormTrajectory apply_dual_affine(const ClosedFormTrajectory& model, const DualAffine& xf) {
  validate_model(model);
  const Mat3& a = xf.linear();
  const double c = xf.time_scale();
  const double d = xf.time_shift();

  std::array<std::vector<double>, 3> shifted;
  std::size_t length = 1;
  for (int k = 0; k < 3; ++k) {
    shifted[k] = detail::substitute_affine(model.axes[k].coefficients, c, d);
    length = std::max(length, shifted[k].size());
  }

  ClosedFormTrajectory out;
  for (int r = 0; r < 3; ++r) {
    auto& axis = out.axes[r];
    axis.coefficients.assign(length, 0.0);
    for (int k = 0; k < 3; ++k) {
      if (a(r, k) == 0.0) continue;
      for (std::size_t m = 0; m < shifted[k].size(); ++m) axis.coefficients[m] += a(r, k) * shifted[k][m];
      for (const auto& w : model.axes[k].waves) {
        axis.waves.push_back({a(r, k) * w.amplitude, w.frequency * c, w.frequency * d + w.phase});
      }
    }
    axis.coefficients[0] += xf.translation()[r];
  }
  return out;
}

/// Column i becomes c^i A (column i). Column 0 is treated as already centered,
/// so the translation does not enter.
inline DerivativeStack push_forward_stack(const DerivativeStack& stack, const DualAffine& xf) {
  DerivativeStack out = stack;
  for (auto& frame : out.frames) {
    double power = 1.0;
    for (int i = 0; i < kStackColumns; ++i) {
      frame.col(i) = power * (xf.linear() * frame.col(i));
      power *= xf.time_scale();
    }
  }
  return out;
}

/// Sampling limits for random_transform.
struct TransformBounds {
  double max_condition = 10.0;
  double min_abs_det = 0.1;
  double max_abs_det = 10.0;
  double min_time_scale = 0.5;
  double max_time_scale = 2.0;
  double max_abs_time_shift = 10.0;
  double max_translation = 5.0;
  bool allow_reflection = true;
};

inline void validate_bounds(const TransformBounds& b) {
  const bool ok = b.max_condition >= 1.0 && b.min_abs_det >= kMinAbsDeterminant && b.min_abs_det <= b.max_abs_det &&
                  std::isfinite(b.max_abs_det) && b.min_time_scale > 0.0 && b.min_time_scale <= b.max_time_scale &&
                  std::isfinite(b.max_time_scale) && b.max_abs_time_shift >= 0.0 && b.max_translation >= 0.0 &&
                  std::isfinite(b.max_condition) && std::isfinite(b.max_abs_time_shift) &&
                  std::isfinite(b.max_translation);
  if (!ok) throw std::invalid_argument("unsatisfiable transform bounds");
}

namespace detail {

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector4d q;
  do {
    for (int i = 0; i < 4; ++i) q[i] = normal(rng);
  } while (q.norm() < 1e-8);
  q.normalize();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),  //
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),    //
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace detail

/// Deterministic random transform for a seed. A = R1 diag(s) R2 with the
/// singular values spread by at most max_condition and their product in
/// [min_abs_det, max_abs_det]; c is log-uniform, d and T uniform.
inline DualAffine random_transform(std::uint64_t seed, const TransformBounds& bounds = {}) {
  validate_bounds(bounds);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5741u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double log_det = std::log(bounds.min_abs_det) + unit(rng) * (std::log(bounds.max_abs_det) - std::log(bounds.min_abs_det));
  const double log_cond = std::log(bounds.max_condition);
  std::array<double, 3> spread{};
  for (auto& e : spread) e = unit(rng) * log_cond;
  const double spread_mean = (spread[0] + spread[1] + spread[2]) / 3.0;
  Vec3 singular;
  for (int i = 0; i < 3; ++i) singular[i] = std::exp(log_det / 3.0 + spread[i] - spread_mean);
  if (bounds.allow_reflection && unit(rng) < 0.5) singular[0] = -singular[0];

  const Mat3 r1 = detail::random_rotation(rng);
  const Mat3 r2 = detail::random_rotation(rng);
  const Mat3 a = r1 * singular.asDiagonal() * r2;

  const double c = std::exp(std::log(bounds.min_time_scale) +
                            unit(rng) * (std::log(bounds.max_time_scale) - std::log(bounds.min_time_scale)));
  const double d = (2.0 * unit(rng) - 1.0) * bounds.max_abs_time_shift;

  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 direction;
  do {
    for (int i = 0; i < 3; ++i) direction[i] = normal(rng);
  } while (direction.norm() < 1e-8);
  const Vec3 t = direction.normalized() * (bounds.max_translation * std::cbrt(unit(rng)));
  return {a, t, c, d};
}

}  // namespace stdadi
