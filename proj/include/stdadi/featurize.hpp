#pragma once

// Skeleton sequence -> channel-augmented feature tensor.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "stdadi/invariants.hpp"
#include "stdadi/parallel.hpp"
#include "stdadi/skeleton_io.hpp"
#include "stdadi/spline.hpp"

namespace stdadi {

struct FeaturizeOptions {
  InvariantConfig invariants{};
  /// Body slots in the output tensor.
  std::size_t max_bodies = kDefaultMaxBodies;
  double dt = 1.0;
  unsigned threads = 1;
};

/// A maximal run of consecutive frames in which one body is present.
struct PresenceRun {
  std::size_t body = 0;
  std::size_t first = 0;
  std::size_t length = 0;
};

inline std::vector<PresenceRun> presence_runs(const SkeletonSequence& seq) {
  std::vector<PresenceRun> runs;
  for (std::size_t b = 0; b < seq.body_count; ++b) {
    std::size_t f = 0;
    while (f < seq.frame_count) {
      if (!seq.present(f, b)) {
        ++f;
        continue;
      }
      const std::size_t first = f;
      while (f < seq.frame_count && seq.present(f, b)) ++f;
      runs.push_back({b, first, f - first});
    }
  }
  return runs;
}

/// Each body is featurized independently, joint by joint, over each run of
/// frames where it is present. Runs shorter than the spline minimum keep
/// zero invariants.
inline InvariantGrid compute_invariants(const SkeletonSequence& seq, const FeaturizeOptions& options) {
  validate_config(options.invariants);
  InvariantGrid grid(seq.frame_count, seq.body_count, seq.joint_count);

  struct Task {
    PresenceRun run;
    std::size_t joint;
  };
  std::vector<Task> tasks;
  std::map<std::size_t, std::unique_ptr<QuinticInterpolator>> splines;
  for (const auto& run : presence_runs(seq)) {
    if (run.length < kMinSplineSamples) continue;
    auto& slot = splines[run.length];
    if (!slot) slot = std::make_unique<QuinticInterpolator>(run.length);
    for (std::size_t j = 0; j < seq.joint_count; ++j) tasks.push_back({run, j});
  }

  parallel_for(tasks.size(), options.threads, [&](std::size_t n) {
    const auto& [run, joint] = tasks[n];
    JointTrajectory traj;
    traj.dt = options.dt;
    traj.samples.reserve(run.length);
    for (std::size_t f = run.first; f < run.first + run.length; ++f) traj.samples.push_back(seq.position(f, run.body, joint));
    const DerivativeStack stack = fit_and_differentiate(traj, *splines.at(run.length));
    for (std::size_t t = 0; t < run.length; ++t) {
      grid.at(run.first + t, run.body, joint) = stdadi8(stack[t], options.invariants);
    }
  });
  return grid;
}

/// Output shape (11, frames, joints, max_bodies).
inline FeatureTensor featurize(const SkeletonSequence& seq, const FeaturizeOptions& options = {}) {
  const SkeletonSequence padded = pad_bodies(seq, std::max(options.max_bodies, seq.body_count));
  return augment_channels(padded, compute_invariants(padded, options), options.invariants);
}

}  // namespace stdadi
