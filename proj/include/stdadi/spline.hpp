#pragma once

// Degree-5 interpolating B-spline with not-a-knot end conditions, used to
// estimate derivatives of orders 0..4 of sampled joint trajectories.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stdadi/errors.hpp"

namespace stdadi {

inline constexpr int kSplineDegree = 5;
inline constexpr int kMaxDerivativeOrder = 4;
inline constexpr int kStackColumns = kMaxDerivativeOrder + 1;
inline constexpr std::size_t kMinSplineSamples = kSplineDegree + 1;
inline constexpr double kRmsFloor = 1e-12;

using Vec3 = Eigen::Vector3d;

/// Column i holds the i-th time derivative of a trajectory at one frame.
/// Column 0 is the mean-centered position.
using DerivativeFrame = Eigen::Matrix<double, 3, kStackColumns>;

struct JointTrajectory {
  std::vector<Vec3> samples;
  double dt = 1.0;
};

struct DerivativeStack {
  std::vector<DerivativeFrame> frames;

  std::size_t size() const noexcept { return frames.size(); }
  const DerivativeFrame& operator[](std::size_t t) const { return frames[t]; }
  DerivativeFrame& operator[](std::size_t t) { return frames[t]; }
};

struct DifferentiationOptions {
  /// Divide the whole stack by the RMS radius of the centered positions.
  bool normalize = true;
};

namespace detail {

// Mean computed relative to the first sample so that constant data centers to
// exactly zero.
template <class Get>
Vec3 anchored_mean(std::size_t count, Get&& get) {
  const Vec3 anchor = get(0);
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < count; ++i) sum += get(i) - anchor;
  return anchor + sum / static_cast<double>(count);
}

}  // namespace detail

/// Subtracts the frame mean from column 0.
inline void center_positions(DerivativeStack& stack) {
  if (stack.frames.empty()) return;
  const Vec3 mean = detail::anchored_mean(stack.size(), [&](std::size_t t) -> Vec3 { return stack[t].col(0); });
  for (auto& frame : stack.frames) frame.col(0) -= mean;
}

/// RMS of column 0 over frames.
inline double rms_radius(const DerivativeStack& stack) {
  if (stack.frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& frame : stack.frames) sum += frame.col(0).squaredNorm();
  return std::sqrt(sum / static_cast<double>(stack.size()));
}

/// Divides the stack by its RMS radius (floored at 1e-12). Returns the divisor.
inline double normalize_scale(DerivativeStack& stack) {
  const double scale = std::max(rms_radius(stack), kRmsFloor);
  for (auto& frame : stack.frames) frame /= scale;
  return scale;
}

/// Quintic not-a-knot interpolation on the sites 0, 1, ..., n-1.
///
/// Knots are the sites themselves with the two sites next to each end removed,
/// so the spline is C^5 across sites 1, 2, n-3 and n-2. With exactly six sites
/// it degenerates to the interpolating quintic polynomial. Quintics are
/// reproduced exactly everywhere.
///
/// The collocation matrix is banded and totally positive, so it is factored
/// once without pivoting and reused for every right-hand side of the same
/// length.
class QuinticInterpolator {
 public:
  explicit QuinticInterpolator(std::size_t sample_count) : n_(sample_count) {
    if (n_ < kMinSplineSamples) {
      throw TrajectoryError("trajectory too short: " + std::to_string(n_) + " samples, need at least " +
                            std::to_string(kMinSplineSamples));
    }
    build_knots();
    build_site_tables();
    factor();
  }

  std::size_t sample_count() const noexcept { return n_; }

  /// Solves for control points, one column per coordinate. `values` holds one
  /// row per site and is overwritten.
  void solve_in_place(Eigen::Matrix<double, Eigen::Dynamic, 3>& values) const {
    // forward substitution with unit lower factor
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last = std::min(n_ - 1, k + kBand);
      for (std::size_t i = k + 1; i <= last; ++i) {
        const double l = band(i, k);
        if (l != 0.0) values.row(i) -= l * values.row(k);
      }
    }
    for (std::size_t kk = n_; kk-- > 0;) {
      const std::size_t last = std::min(n_ - 1, kk + kBand);
      for (std::size_t j = kk + 1; j <= last; ++j) {
        const double u = band(kk, j);
        if (u != 0.0) values.row(kk) -= u * values.row(j);
      }
      values.row(kk) /= band(kk, kk);
    }
  }

  /// Derivatives of orders 0..4 at every site, with respect to the site index.
  std::vector<DerivativeFrame> derivatives_at_sites(const Eigen::Matrix<double, Eigen::Dynamic, 3>& control) const {
    std::vector<DerivativeFrame> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = spans_[i] - kSplineDegree;
      DerivativeFrame frame = DerivativeFrame::Zero();
      for (int k = 0; k <= kMaxDerivativeOrder; ++k) {
        for (int j = 0; j <= kSplineDegree; ++j) {
          frame.col(k) += site_basis_[i][k][j] * control.row(first + j).transpose();
        }
      }
      out[i] = frame;
    }
    return out;
  }

  std::span<const double> knots() const noexcept { return knots_; }

 private:
  static constexpr std::size_t kBand = kSplineDegree;
  static constexpr std::size_t kBandWidth = 2 * kBand + 1;
  using BasisTable = std::array<std::array<double, kSplineDegree + 1>, kMaxDerivativeOrder + 1>;

  void build_knots() {
    const int p = kSplineDegree;
    knots_.assign(p + 1, 0.0);
    for (std::size_t s = 3; s + 4 <= n_; ++s) knots_.push_back(static_cast<double>(s));
    knots_.insert(knots_.end(), p + 1, static_cast<double>(n_ - 1));
  }

  std::size_t find_span(double x) const {
    const std::size_t p = kSplineDegree;
    if (x >= knots_[n_]) return n_ - 1;
    std::size_t lo = p;
    std::size_t hi = n_;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (x < knots_[mid]) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return lo;
  }

  // Nonzero basis functions and their derivatives at x (The NURBS Book, A2.3).
  BasisTable basis_derivatives(std::size_t span, double x) const {
    constexpr int p = kSplineDegree;
    constexpr int nd = kMaxDerivativeOrder;
    double ndu[p + 1][p + 1];
    double left[p + 1];
    double right[p + 1];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu[j][r] = right[r + 1] + left[j - r];
        const double temp = ndu[r][j - 1] / ndu[j][r];
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }

    BasisTable ders{};
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

    double a[2][p + 1];
    for (int r = 0; r <= p; ++r) {
      int s1 = 0;
      int s2 = 1;
      a[0][0] = 1.0;
      for (int k = 1; k <= nd; ++k) {
        double d = 0.0;
        const int rk = r - k;
        const int pk = p - k;
        if (r >= k) {
          a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
          d = a[s2][0] * ndu[rk][pk];
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
          d += a[s2][j] * ndu[rk + j][pk];
        }
        if (r <= pk) {
          a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
          d += a[s2][k] * ndu[r][pk];
        }
        ders[k][r] = d;
        std::swap(s1, s2);
      }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
      for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
      factor *= (p - k);
    }
    return ders;
  }

  void build_site_tables() {
    spans_.resize(n_);
    site_basis_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      spans_[i] = find_span(static_cast<double>(i));
      site_basis_[i] = basis_derivatives(spans_[i], static_cast<double>(i));
    }
  }

  double& band(std::size_t row, std::size_t col) { return band_[row * kBandWidth + (col + kBand - row)]; }
  double band(std::size_t row, std::size_t col) const { return band_[row * kBandWidth + (col + kBand - row)]; }

  void factor() {
    band_.assign(n_ * kBandWidth, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = spans_[i] - kSplineDegree;
      for (std::size_t j = 0; j <= kSplineDegree; ++j) {
        const double value = site_basis_[i][0][j];
        if (value == 0.0) continue;
        band(i, first + j) = value;
      }
    }
    for (std::size_t k = 0; k < n_; ++k) {
      const double pivot = band(k, k);
      const std::size_t last = std::min(n_ - 1, k + kBand);
      for (std::size_t i = k + 1; i <= last; ++i) {
        double& lower = band(i, k);
        if (lower == 0.0) continue;
        lower /= pivot;
        for (std::size_t j = k + 1; j <= last; ++j) band(i, j) -= lower * band(k, j);
      }
    }
  }

  std::size_t n_;
  std::vector<double> knots_;
  std::vector<std::size_t> spans_;
  std::vector<BasisTable> site_basis_;
  std::vector<double> band_;
};

/// Fits the trajectory with a reusable interpolator of matching length.
inline DerivativeStack fit_and_differentiate(const JointTrajectory& traj, const QuinticInterpolator& spline,
                                             const DifferentiationOptions& options = {}) {
  const std::size_t n = traj.samples.size();
  if (n < kMinSplineSamples) {
    throw TrajectoryError("trajectory too short: " + std::to_string(n) + " samples, need at least " +
                          std::to_string(kMinSplineSamples));
  }
  if (spline.sample_count() != n) throw TrajectoryError("interpolator length does not match trajectory length");
  if (!(traj.dt > 0.0) || !std::isfinite(traj.dt)) throw TrajectoryError("sampling interval must be finite and positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!traj.samples[i].allFinite()) throw TrajectoryError("non-finite sample at index " + std::to_string(i));
  }

  // Interpolation reproduces constants, so fitting centered data leaves the
  // derivative columns unchanged and keeps column 0 exactly zero for a
  // motionless joint.
  const Vec3 mean = detail::anchored_mean(n, [&](std::size_t i) -> Vec3 { return traj.samples[i]; });
  Eigen::Matrix<double, Eigen::Dynamic, 3> values(n, 3);
  for (std::size_t i = 0; i < n; ++i) values.row(i) = (traj.samples[i] - mean).transpose();
  spline.solve_in_place(values);

  DerivativeStack stack;
  stack.frames = spline.derivatives_at_sites(values);
  double scale = 1.0;
  for (int k = 1; k <= kMaxDerivativeOrder; ++k) {
    scale /= traj.dt;
    for (auto& frame : stack.frames) frame.col(k) *= scale;
  }
  center_positions(stack);
  if (options.normalize) normalize_scale(stack);
  return stack;
}

inline DerivativeStack fit_and_differentiate(const JointTrajectory& traj, const DifferentiationOptions& options = {}) {
  if (traj.samples.size() < kMinSplineSamples) {
    throw TrajectoryError("trajectory too short: " + std::to_string(traj.samples.size()) +
                          " samples, need at least " + std::to_string(kMinSplineSamples));
  }
  const QuinticInterpolator spline(traj.samples.size());
  return fit_and_differentiate(traj, spline, options);
}

}  // namespace stdadi
