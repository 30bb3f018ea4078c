#pragma once

// Synthetic skeleton sequences for I/O and pipeline tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "stdadi.hpp"

namespace synthetic {

/// Every joint follows its own sum of two sinusoids per axis plus an offset.
/// Frequencies are in radians per frame.
inline stdadi::SkeletonSequence moving_sequence(std::size_t frames, std::size_t bodies, std::uint64_t seed,
                                                double min_frequency = 0.15, double max_frequency = 0.45) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> frequency(min_frequency, max_frequency);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  stdadi::SkeletonSequence seq(frames, bodies, stdadi::kNtuJointCount);
  for (std::size_t b = 0; b < bodies; ++b) {
    for (std::size_t j = 0; j < seq.joint_count; ++j) {
      double offset[3], amp[3][2], freq[3][2], ph[3][2];
      for (int a = 0; a < 3; ++a) {
        offset[a] = normal(rng);
        for (int w = 0; w < 2; ++w) {
          amp[a][w] = 0.3 * normal(rng);
          freq[a][w] = frequency(rng);
          ph[a][w] = phase(rng);
        }
      }
      for (std::size_t f = 0; f < frames; ++f) {
        Eigen::Vector3d p;
        for (int a = 0; a < 3; ++a) {
          p[a] = offset[a];
          for (int w = 0; w < 2; ++w) p[a] += amp[a][w] * std::sin(freq[a][w] * static_cast<double>(f) + ph[a][w]);
        }
        seq.set_position(f, b, j, p);
      }
    }
    for (std::size_t f = 0; f < frames; ++f) seq.set_present(f, b, true);
  }
  return seq;
}

/// Random positions with a prefix of present bodies per frame, for round trips.
inline stdadi::SkeletonSequence random_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> frame_count(1, 6);
  std::uniform_int_distribution<std::size_t> body_count(1, 3);
  std::uniform_int_distribution<std::size_t> joint_count(1, 25);
  std::normal_distribution<double> normal(0.0, 2.0);
  const std::size_t frames = frame_count(rng);
  const std::size_t bodies = body_count(rng);
  stdadi::SkeletonSequence seq(frames, bodies, joint_count(rng));
  std::uniform_int_distribution<std::size_t> present(0, bodies);
  std::size_t max_present = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    std::size_t n = present(rng);
    if (f + 1 == frames && max_present < bodies) n = bodies;
    max_present = std::max(max_present, n);
    for (std::size_t b = 0; b < n; ++b) {
      seq.set_present(f, b, true);
      for (std::size_t j = 0; j < seq.joint_count; ++j) {
        seq.set_position(f, b, j, {normal(rng), normal(rng), normal(rng)});
      }
    }
  }
  return seq;
}

/// Marks (frame, joint, invariant) points where a feature denominator of the
/// normalized spline stack is degenerate (|den| <= 1e-6) for one body.
/// Indexed [(f * joints + j) * 8 + n]. There the epsilon guard, not the
/// geometry, decides the value.
inline std::vector<bool> degenerate_points(const stdadi::SkeletonSequence& seq, std::size_t body) {
  using namespace stdadi;
  std::vector<bool> mask(seq.frame_count * seq.joint_count * kInvariantCount, false);
  for (std::size_t j = 0; j < seq.joint_count; ++j) {
    JointTrajectory traj;
    for (std::size_t f = 0; f < seq.frame_count; ++f) traj.samples.push_back(seq.position(f, body, j));
    const DerivativeStack stack = fit_and_differentiate(traj);
    for (std::size_t f = 0; f < seq.frame_count; ++f)
      for (std::size_t n = 0; n < kInvariantCount; ++n)
        mask[(f * seq.joint_count + j) * kInvariantCount + n] = ratio_parts(stack[f], stdadi_specs()[n]).degenerate();
  }
  return mask;
}

/// Largest invariant-channel difference between two featurized copies of one
/// body over interior frames, skipping points degenerate in either copy.
struct ChannelComparison {
  double worst = 0.0;
  std::size_t compared = 0;
  std::size_t skipped = 0;
};

inline ChannelComparison compare_invariant_channels(const stdadi::FeatureTensor& a, const stdadi::FeatureTensor& b,
                                                    const std::vector<bool>& degenerate_a,
                                                    const std::vector<bool>& degenerate_b, std::size_t boundary) {
  using namespace stdadi;
  ChannelComparison out;
  for (std::size_t f = boundary; f + boundary < a.frames; ++f)
    for (std::size_t j = 0; j < a.joints; ++j)
      for (std::size_t n = 0; n < kInvariantCount; ++n) {
        const std::size_t k = (f * a.joints + j) * kInvariantCount + n;
        if (degenerate_a[k] || degenerate_b[k]) {
          ++out.skipped;
          continue;
        }
        ++out.compared;
        const std::size_t c = kCoordinateChannels + n;
        out.worst = std::max(out.worst, std::abs(a.at(c, f, j, 0) - b.at(c, f, j, 0)));
      }
  return out;
}

}  // namespace synthetic
