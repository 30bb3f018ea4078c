#pragma once

// Invariance verification: random closed-form trajectories, random dual affine
// transforms, and a comparison of the eight invariants at corresponding points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stdadi/analytic.hpp"
#include "stdadi/invariants.hpp"
#include "stdadi/parallel.hpp"
#include "stdadi/spline.hpp"
#include "stdadi/transforms.hpp"

namespace stdadi {

/// Frames within this distance of either end are excluded from spline checks.
inline constexpr std::size_t kBoundaryFrames = 5;
/// A trial whose degenerate fraction exceeds this is regenerated.
inline constexpr double kMaxExcludedFraction = 0.2;
inline constexpr int kMaxRegenerations = 16;
inline constexpr double kRelativeErrorFloor = 1e-6;

enum class TransformFamily {
  random,                   // random_transform with the given bounds
  identity,                 // A = I, T = 0, c = 1, d = 0
  spatial_only,             // random A and T, c = 1, d = 0
  random_fixed_time_scale,  // random A, T, d with c replaced by fixed_time_scale
  time_scale_only,          // A = I, T = 0, d = 0, c = fixed_time_scale
};

enum class TrajectoryFamily { random, constant };

struct VerifyOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  unsigned threads = 1;
  TransformFamily transforms = TransformFamily::random;
  TrajectoryFamily trajectories = TrajectoryFamily::random;
  double fixed_time_scale = 2.0;
  TransformBounds bounds{};
  /// Spline path only.
  std::size_t samples = 256;
};

struct InvarianceReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t samples = 0;
  double tolerance = 0.0;
  /// A point is one (trial, frame, component) evaluation.
  std::size_t total_points = 0;
  std::size_t excluded_points = 0;
  std::size_t regenerated_trials = 0;
  std::vector<std::string> labels;
  std::vector<double> max_error;
  std::vector<double> mean_error;
  double overall_max_error = 0.0;
  /// Spline path only: the original's spline invariants against its exact
  /// invariants, over the same non-degenerate points. The mean tracks
  /// convergence; the max is set by whichever point sits closest to a pole.
  double fidelity_max_error = 0.0;
  double fidelity_mean_error = 0.0;
  bool pass = false;
};

inline double relative_error(double transformed, double original) {
  return std::abs(transformed - original) / std::max(std::abs(original), kRelativeErrorFloor);
}

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial, int attempt, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(attempt), stream};
  return std::mt19937_64(seq);
}

inline DualAffine pick_transform(std::mt19937_64& rng, const VerifyOptions& options) {
  const std::uint64_t transform_seed = rng();
  switch (options.transforms) {
    case TransformFamily::identity:
      return DualAffine::identity();
    case TransformFamily::time_scale_only:
      return {Mat3::Identity(), Vec3::Zero(), options.fixed_time_scale, 0.0};
    case TransformFamily::spatial_only: {
      const DualAffine xf = random_transform(transform_seed, options.bounds);
      return {xf.linear(), xf.translation(), 1.0, 0.0};
    }
    case TransformFamily::random_fixed_time_scale: {
      const DualAffine xf = random_transform(transform_seed, options.bounds);
      return {xf.linear(), xf.translation(), options.fixed_time_scale, xf.time_shift()};
    }
    case TransformFamily::random:
      break;
  }
  return random_transform(transform_seed, options.bounds);
}

struct Accumulator {
  std::vector<double> max;
  std::vector<double> sum;
  std::vector<std::size_t> count;
  std::size_t points = 0;
  std::size_t excluded = 0;
  double fidelity_max = 0.0;
  double fidelity_sum = 0.0;
  std::size_t fidelity_points = 0;
  bool regenerated = false;

  explicit Accumulator(std::size_t components) : max(components, 0.0), sum(components, 0.0), count(components, 0) {}

  void add(std::size_t component, double error) {
    max[component] = std::max(max[component], error);
    sum[component] += error;
    ++count[component];
  }
};

inline InvarianceReport finish(std::string mode, const VerifyOptions& options, std::vector<std::string> labels,
                               const std::vector<Accumulator>& trials) {
  InvarianceReport report;
  report.mode = std::move(mode);
  report.seed = options.seed;
  report.trials = options.trials;
  report.tolerance = options.tolerance;
  report.labels = std::move(labels);
  const std::size_t components = report.labels.size();
  report.max_error.assign(components, 0.0);
  report.mean_error.assign(components, 0.0);
  std::vector<double> sum(components, 0.0);
  std::vector<std::size_t> count(components, 0);
  double fidelity_sum = 0.0;
  std::size_t fidelity_points = 0;
  for (const auto& acc : trials) {
    report.total_points += acc.points;
    report.excluded_points += acc.excluded;
    report.regenerated_trials += acc.regenerated ? 1 : 0;
    report.fidelity_max_error = std::max(report.fidelity_max_error, acc.fidelity_max);
    fidelity_sum += acc.fidelity_sum;
    fidelity_points += acc.fidelity_points;
    for (std::size_t c = 0; c < components; ++c) {
      report.max_error[c] = std::max(report.max_error[c], acc.max[c]);
      sum[c] += acc.sum[c];
      count[c] += acc.count[c];
    }
  }
  for (std::size_t c = 0; c < components; ++c) {
    report.mean_error[c] = count[c] ? sum[c] / static_cast<double>(count[c]) : 0.0;
    report.overall_max_error = std::max(report.overall_max_error, report.max_error[c]);
  }
  report.fidelity_mean_error = fidelity_points ? fidelity_sum / static_cast<double>(fidelity_points) : 0.0;
  return report;
}

inline std::vector<std::string> invariant_labels() {
  std::vector<std::string> labels;
  for (std::size_t n = 0; n < kInvariantCount; ++n) labels.push_back("I" + std::to_string(n + 1));
  return labels;
}

}  // namespace detail

/// Degree-4 polynomial plus one sinusoid per axis. Coefficient k is drawn
/// with scale 8^-k so each term is O(1) on [0, 8), the analytic grid.
inline ClosedFormTrajectory random_analytic_trajectory(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> frequency(0.5, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ClosedFormTrajectory f;
  for (auto& axis : f.axes) {
    double scale = 1.0;
    axis.coefficients.resize(5);
    for (auto& a : axis.coefficients) {
      a = normal(rng) * scale;
      scale /= 8.0;
    }
    axis.waves.push_back({normal(rng), frequency(rng), phase(rng)});
  }
  return f;
}

/// Two sinusoids per axis plus an offset; frequencies in [0.5, 1.5] per time
/// unit so that the spline grids used below resolve them.
inline ClosedFormTrajectory random_band_limited_trajectory(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> frequency(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ClosedFormTrajectory f;
  for (auto& axis : f.axes) {
    axis.coefficients = {normal(rng)};
    for (int w = 0; w < 2; ++w) axis.waves.push_back({normal(rng), frequency(rng), phase(rng)});
  }
  return f;
}

inline ClosedFormTrajectory random_constant_trajectory(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ClosedFormTrajectory f;
  for (auto& axis : f.axes) axis.coefficients = {normal(rng)};
  return f;
}

/// Grid used by the analytic check: 32 points with spacing 0.25.
inline constexpr SampleGrid kAnalyticGrid{0.0, 0.25, 32};
/// Time span covered by the spline check regardless of sample count.
inline constexpr double kSplineSpan = 32.0;
inline constexpr std::size_t kSplineBaseSamples = 64;

/// Exact derivatives of a random trajectory and of its transform, invariants
/// compared at corresponding points with epsilon omitted.
inline InvarianceReport check_invariance_analytic(const VerifyOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("trials must be at least 1");
  std::vector<detail::Accumulator> results(options.trials, detail::Accumulator(kInvariantCount));
  const auto& specs = stdadi_specs();

  parallel_for(options.trials, options.threads, [&](std::size_t trial) {
    for (int attempt = 0;; ++attempt) {
      auto rng = detail::trial_rng(options.seed, trial, attempt, 0xa11u);
      const ClosedFormTrajectory f = options.trajectories == TrajectoryFamily::constant
                                         ? random_constant_trajectory(rng)
                                         : random_analytic_trajectory(rng);
      const DualAffine xf = detail::pick_transform(rng, options);
      const DerivativeStack original = differentiate_analytic(f, kAnalyticGrid);
      const DerivativeStack transformed = differentiate_analytic(apply_dual_affine(f, xf), xf.transformed_grid(kAnalyticGrid));

      detail::Accumulator acc(kInvariantCount);
      for (std::size_t t = 0; t < original.size(); ++t) {
        for (std::size_t n = 0; n < kInvariantCount; ++n) {
          ++acc.points;
          const RatioParts before = ratio_parts(original[t], specs[n]);
          if (before.degenerate()) {
            ++acc.excluded;
            continue;
          }
          const RatioParts after = ratio_parts(transformed[t], specs[n]);
          acc.add(n, relative_error(after.exact(), before.exact()));
        }
      }
      const bool retry = options.trajectories == TrajectoryFamily::random &&
                         static_cast<double>(acc.excluded) > kMaxExcludedFraction * static_cast<double>(acc.points) &&
                         attempt + 1 < kMaxRegenerations;
      if (!retry) {
        acc.regenerated = attempt > 0;
        results[trial] = std::move(acc);
        return;
      }
    }
  });

  InvarianceReport report = detail::finish("analytic", options, detail::invariant_labels(), results);
  report.pass = report.overall_max_error < options.tolerance;
  return report;
}

/// Same protocol with derivatives estimated by the quintic spline. The
/// original is sampled at t_i = i * 32 / samples; the transform is sampled on
/// the corresponding grid u_i = (t_i - d) / c. Invariants are compared on the
/// interior points of the 64-point base lattice, which every admissible
/// sample count (a multiple of 64) contains, so reports at different sample
/// counts measure the same time points. The original's spline invariants are
/// also compared against its exact invariants (fidelity).
inline InvarianceReport check_invariance_spline(const VerifyOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (options.samples < kSplineBaseSamples || options.samples % kSplineBaseSamples != 0) {
    throw std::invalid_argument("spline check needs a sample count that is a positive multiple of 64");
  }
  const std::size_t stride = options.samples / kSplineBaseSamples;
  const SampleGrid grid{0.0, kSplineSpan / static_cast<double>(options.samples), options.samples};
  const QuinticInterpolator spline(options.samples);
  std::vector<detail::Accumulator> results(options.trials, detail::Accumulator(kInvariantCount));
  const auto& specs = stdadi_specs();

  parallel_for(options.trials, options.threads, [&](std::size_t trial) {
    for (int attempt = 0;; ++attempt) {
      auto rng = detail::trial_rng(options.seed, trial, attempt, 0x5b1u);
      const ClosedFormTrajectory f = options.trajectories == TrajectoryFamily::constant
                                         ? random_constant_trajectory(rng)
                                         : random_band_limited_trajectory(rng);
      const DualAffine xf = detail::pick_transform(rng, options);

      const DerivativeStack exact = differentiate_analytic(f, grid);
      const DerivativeStack original = fit_and_differentiate(sample(f, grid), spline);
      const DerivativeStack transformed =
          fit_and_differentiate(sample(apply_dual_affine(f, xf), xf.transformed_grid(grid)), spline);

      detail::Accumulator acc(kInvariantCount);
      for (std::size_t base = kBoundaryFrames; base + kBoundaryFrames < kSplineBaseSamples; ++base) {
        const std::size_t t = base * stride;
        for (std::size_t n = 0; n < kInvariantCount; ++n) {
          ++acc.points;
          const RatioParts truth = ratio_parts(exact[t], specs[n]);
          const RatioParts before = ratio_parts(original[t], specs[n]);
          if (truth.degenerate() || before.degenerate()) {
            ++acc.excluded;
            continue;
          }
          const RatioParts after = ratio_parts(transformed[t], specs[n]);
          acc.add(n, relative_error(after.exact(), before.exact()));
          const double fidelity = relative_error(before.exact(), truth.exact());
          acc.fidelity_max = std::max(acc.fidelity_max, fidelity);
          acc.fidelity_sum += fidelity;
          ++acc.fidelity_points;
        }
      }
      const bool retry = options.trajectories == TrajectoryFamily::random &&
                         static_cast<double>(acc.excluded) > kMaxExcludedFraction * static_cast<double>(acc.points) &&
                         attempt + 1 < kMaxRegenerations;
      if (!retry) {
        acc.regenerated = attempt > 0;
        results[trial] = std::move(acc);
        return;
      }
    }
  });

  InvarianceReport report = detail::finish("spline", options, detail::invariant_labels(), results);
  report.samples = options.samples;
  report.pass = report.overall_max_error < options.tolerance;
  return report;
}

/// Compares raw (unnormalized) derivative columns instead of invariants.
/// `tolerance` is the change that must be exceeded: pass means the columns
/// are confirmed NOT invariant.
inline InvarianceReport negative_control(const VerifyOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("trials must be at least 1");
  std::vector<detail::Accumulator> results(options.trials, detail::Accumulator(kStackColumns));
  const DifferentiationOptions raw{.normalize = false};

  parallel_for(options.trials, options.threads, [&](std::size_t trial) {
    auto rng = detail::trial_rng(options.seed, trial, 0, 0xc0du);
    const ClosedFormTrajectory f = options.trajectories == TrajectoryFamily::constant
                                       ? random_constant_trajectory(rng)
                                       : random_analytic_trajectory(rng);
    const DualAffine xf = detail::pick_transform(rng, options);
    const DerivativeStack original = differentiate_analytic(f, kAnalyticGrid, raw);
    const DerivativeStack transformed =
        differentiate_analytic(apply_dual_affine(f, xf), xf.transformed_grid(kAnalyticGrid), raw);

    detail::Accumulator acc(kStackColumns);
    for (std::size_t t = 0; t < original.size(); ++t) {
      for (int col = 0; col < kStackColumns; ++col) {
        ++acc.points;
        const double change = (transformed[t].col(col) - original[t].col(col)).norm() /
                              std::max(original[t].col(col).norm(), kRelativeErrorFloor);
        acc.add(static_cast<std::size_t>(col), change);
      }
    }
    results[trial] = std::move(acc);
  });

  std::vector<std::string> labels;
  for (int col = 0; col < kStackColumns; ++col) labels.push_back("D" + std::to_string(col));
  InvarianceReport report = detail::finish("negative-control", options, std::move(labels), results);
  report.pass = report.overall_max_error > options.tolerance;
  return report;
}

namespace detail {

inline std::string sci(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6e", value);
  return buffer;
}

}  // namespace detail

/// Machine-readable key=value lines.
inline std::string format_key_values(const InvarianceReport& r) {
  std::string out;
  auto kv = [&](const std::string& key, const std::string& value) { out += key + '=' + value + '\n'; };
  kv("mode", r.mode);
  kv("seed", std::to_string(r.seed));
  kv("trials", std::to_string(r.trials));
  if (r.mode == "spline") kv("samples", std::to_string(r.samples));
  kv("tolerance", detail::sci(r.tolerance));
  kv("total_points", std::to_string(r.total_points));
  kv("excluded_points", std::to_string(r.excluded_points));
  kv("regenerated_trials", std::to_string(r.regenerated_trials));
  for (std::size_t c = 0; c < r.labels.size(); ++c) {
    kv(r.labels[c] + ".max_rel_error", detail::sci(r.max_error[c]));
    kv(r.labels[c] + ".mean_rel_error", detail::sci(r.mean_error[c]));
  }
  kv("max_rel_error", detail::sci(r.overall_max_error));
  if (r.mode == "spline") {
    kv("fidelity_max_rel_error", detail::sci(r.fidelity_max_error));
    kv("fidelity_mean_rel_error", detail::sci(r.fidelity_mean_error));
  }
  kv("pass", r.pass ? "true" : "false");
  return out;
}

/// Human-readable table.
inline std::string format_summary(const InvarianceReport& r) {
  std::string out;
  const bool control = r.mode == "negative-control";
  out += "invariance check: " + r.mode + " (" + std::to_string(r.trials) + " trials, seed " + std::to_string(r.seed) + ")\n";
  out += "  points " + std::to_string(r.total_points) + ", excluded as degenerate " + std::to_string(r.excluded_points) +
         ", regenerated trials " + std::to_string(r.regenerated_trials) + "\n";
  out += control ? "  column   max change     mean change\n" : "  feature  max rel err    mean rel err\n";
  for (std::size_t c = 0; c < r.labels.size(); ++c) {
    char line[96];
    std::snprintf(line, sizeof(line), "  %-8s %-14s %s\n", r.labels[c].c_str(), detail::sci(r.max_error[c]).c_str(),
                  detail::sci(r.mean_error[c]).c_str());
    out += line;
  }
  if (r.mode == "spline") {
    out += "  spline vs exact (original): max " + detail::sci(r.fidelity_max_error) + ", mean " +
           detail::sci(r.fidelity_mean_error) + "\n";
  }
  out += control ? "  non-invariance threshold " : "  tolerance ";
  out += detail::sci(r.tolerance) + ": " + (r.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace stdadi
