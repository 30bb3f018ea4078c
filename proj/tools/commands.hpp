#pragma once

// Subcommand implementations behind the `stdadi` executable. Kept free of
// argument parsing so tests can drive them directly.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stdadi.hpp"

namespace stdadi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitInputError = 2;

struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output = ".";
  TensorFormat format = TensorFormat::raw_f32;
  double epsilon = kDefaultEpsilon;
  bool squash = true;
  std::size_t max_bodies = kDefaultMaxBodies;
  std::size_t min_frames = 12;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  bool skip_bad = false;
};

inline std::filesystem::path output_path_for(const PipelineConfig& config, const std::filesystem::path& input) {
  const std::string stem = input.stem().string();
  return config.output / (stem + (config.format == TensorFormat::csv ? ".stdadi.csv" : ".stdadi.f32"));
}

/// Expands directories to their `.skeleton` files, sorted by name.
inline std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::filesystem::path> files;
  for (const auto& path : inputs) {
    if (std::filesystem::is_directory(path)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".skeleton") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::is_regular_file(path)) {
      files.push_back(path);
    } else {
      throw std::runtime_error("input not found: " + path.string());
    }
  }
  return files;
}

inline int cmd_featurize(const PipelineConfig& config, std::ostream& log) {
  if (!(config.epsilon > 0.0)) {
    log << "error: --epsilon must be positive\n";
    return kExitInputError;
  }
  if (config.min_frames < kMinSplineSamples) {
    log << "error: --min-frames must be at least " << kMinSplineSamples << "\n";
    return kExitInputError;
  }
  if (config.max_bodies == 0) {
    log << "error: --max-bodies must be at least 1\n";
    return kExitInputError;
  }

  std::vector<std::filesystem::path> files;
  try {
    files = collect_inputs(config.inputs);
    std::filesystem::create_directories(config.output);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  FeaturizeOptions options;
  options.invariants.epsilon = config.epsilon;
  options.invariants.squash = config.squash ? Squash::tanh : Squash::none;
  options.max_bodies = config.max_bodies;
  options.threads = config.threads;

  for (const auto& file : files) {
    SkeletonSequence seq;
    try {
      seq = parse_skeleton_file(file, ParseOptions{config.max_bodies});
    } catch (const std::exception& e) {
      log << (config.skip_bad ? "warning: skipping " : "error: ") << file.string() << ": " << e.what() << "\n";
      if (config.skip_bad) continue;
      return kExitInputError;
    }
    if (seq.frame_count < config.min_frames) {
      log << "warning: skipping " << file.string() << ": " << seq.frame_count << " frames, below --min-frames "
          << config.min_frames << "\n";
      continue;
    }
    try {
      const FeatureTensor tensor = featurize(seq, options);
      const auto destination = output_path_for(config, file);
      write_feature_tensor(tensor, destination, config.format);
      log << file.string() << " -> " << destination.string() << " (" << tensor.channels << "x" << tensor.frames
          << "x" << tensor.joints << "x" << tensor.bodies << ")\n";
    } catch (const std::exception& e) {
      log << "error: " << file.string() << ": " << e.what() << "\n";
      return kExitInputError;
    }
  }
  return kExitOk;
}

enum class VerifyMode { analytic, spline, negative_control };

struct VerifyConfig {
  VerifyMode mode = VerifyMode::analytic;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::optional<double> tolerance;
  std::size_t samples = 256;
  unsigned threads = 1;
  TransformFamily transforms = TransformFamily::random;
};

inline double default_tolerance(VerifyMode mode) {
  switch (mode) {
    case VerifyMode::spline: return 1e-2;
    case VerifyMode::negative_control: return 0.1;
    case VerifyMode::analytic: break;
  }
  return 1e-6;
}

inline int cmd_verify(const VerifyConfig& config, std::ostream& out, std::ostream& log) {
  if (config.trials == 0) {
    log << "error: --trials must be at least 1\n";
    return kExitInputError;
  }
  VerifyOptions options;
  options.trials = config.trials;
  options.seed = config.seed;
  options.tolerance = config.tolerance.value_or(default_tolerance(config.mode));
  options.samples = config.samples;
  options.threads = config.threads;
  options.transforms = config.transforms;

  InvarianceReport report;
  try {
    switch (config.mode) {
      case VerifyMode::analytic: report = check_invariance_analytic(options); break;
      case VerifyMode::spline: report = check_invariance_spline(options); break;
      case VerifyMode::negative_control: report = negative_control(options); break;
    }
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  out << format_summary(report) << "\n" << format_key_values(report);
  return report.pass ? kExitOk : kExitVerificationFailed;
}

inline int cmd_enumerate(int max_degree, int max_order, std::ostream& out, std::ostream& log) {
  std::vector<MonomialSpec> specs;
  try {
    specs = enumerate_specs(max_degree, max_order);
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  out << "# canonical rational invariants, degree <= " << max_degree << ", order <= " << max_order << "\n";
  std::vector<bool> found(kInvariantCount, false);
  std::size_t index = 0;
  for (const auto& spec : specs) {
    std::string line = std::to_string(++index);
    line.insert(0, line.size() < 4 ? 4 - line.size() : 0, ' ');
    line += "  " + to_string(spec);
    if (const auto match = match_feature_invariant(spec)) {
      found[match->index - 1] = true;
      line.resize(std::max<std::size_t>(line.size(), 28), ' ');
      line += "  feature I" + std::to_string(match->index);
      if (match->reciprocal) line += " (reciprocal)";
    }
    out << line << "\n";
  }
  const auto hits = static_cast<std::size_t>(std::count(found.begin(), found.end(), true));
  out << "count=" << specs.size() << "\n";
  out << "reference_count=" << kReferenceSpecCount << "\n";
  out << "feature_invariants_found=" << hits << "/" << kInvariantCount << "\n";
  out << "convention=sorted triples; equal factor counts; equal summed orders; no triple shared between numerator "
         "and denominator; reciprocals counted once\n";
  if (max_degree == 2 && max_order == 4 && specs.size() != kReferenceSpecCount) {
    out << "note=count differs from the reference 55, whose counting convention is not stated; products of two "
           "degree-1 invariants are kept as separate degree-2 entries here\n";
  }
  return kExitOk;
}

}  // namespace stdadi::cli
