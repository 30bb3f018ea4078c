#pragma once

// Relative invariants det M^{ijk} and the rational absolute invariants built
// from them.
//
// Under g(u) = A f(t) + T, u = (t - d) / c, column i of a derivative stack maps
// to c^i A (column i), so det M^{ijk} picks up c^{i+j+k} det A. A ratio with
// the same number of determinant factors on each side and equal summed orders
// cancels both factors.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "stdadi/errors.hpp"
#include "stdadi/skeleton_io.hpp"
#include "stdadi/spline.hpp"

namespace stdadi {

inline constexpr double kDefaultEpsilon = 1e-8;
/// Denominators at or below this magnitude (after scale normalization) make
/// a point degenerate for verification purposes.
inline constexpr double kDegenerateDenominator = 1e-6;

/// Three derivative orders selecting the columns of M^{ijk}, in column order.
struct IndexTriple {
  int i = 0;
  int j = 0;
  int k = 0;

  int order_sum() const noexcept { return i + j + k; }
  bool distinct() const noexcept { return i != j && j != k && i != k; }
  bool sorted() const noexcept { return i < j && j < k; }

  auto operator<=>(const IndexTriple&) const = default;
};

inline std::string to_string(const IndexTriple& t) {
  return std::to_string(t.i) + std::to_string(t.j) + std::to_string(t.k);
}

/// prod det(numerator) / prod det(denominator).
struct MonomialSpec {
  std::vector<IndexTriple> numerator;
  std::vector<IndexTriple> denominator;

  std::size_t degree() const noexcept { return numerator.size(); }

  bool operator==(const MonomialSpec&) const = default;
};

/// Canonical text, e.g. "012*023/013*013".
inline std::string to_string(const MonomialSpec& spec) {
  std::string out;
  for (std::size_t n = 0; n < spec.numerator.size(); ++n) {
    if (n) out += '*';
    out += to_string(spec.numerator[n]);
  }
  out += '/';
  for (std::size_t n = 0; n < spec.denominator.size(); ++n) {
    if (n) out += '*';
    out += to_string(spec.denominator[n]);
  }
  return out;
}

enum class Squash { tanh, none };

struct InvariantConfig {
  double epsilon = kDefaultEpsilon;
  Squash squash = Squash::tanh;
};

inline void validate_config(const InvariantConfig& config) {
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw std::invalid_argument("epsilon must be finite and positive");
  }
}

using InvariantVector = std::array<double, kInvariantCount>;

inline void check_orders(int i, int j, int k) {
  for (int order : {i, j, k}) {
    if (order < 0 || order > kMaxDerivativeOrder) {
      throw std::out_of_range("derivative order " + std::to_string(order) + " outside 0.." +
                              std::to_string(kMaxDerivativeOrder));
    }
  }
  if (i == j || j == k || i == k) throw std::invalid_argument("determinant orders must be pairwise distinct");
}

/// Scalar triple product a . (b x c), the determinant of [a b c].
inline double triple_product(const DerivativeFrame& m, int a, int b, int c) {
  return m(0, a) * (m(1, b) * m(2, c) - m(2, b) * m(1, c)) - m(1, a) * (m(0, b) * m(2, c) - m(2, b) * m(0, c)) +
         m(2, a) * (m(0, b) * m(1, c) - m(1, b) * m(0, c));
}

/// det of the 3x3 matrix with columns f^(i), f^(j), f^(k).
inline double det_m(const DerivativeFrame& stack, int i, int j, int k) {
  check_orders(i, j, k);
  return triple_product(stack, i, j, k);
}

inline double det_m(const DerivativeFrame& stack, const IndexTriple& t) { return det_m(stack, t.i, t.j, t.k); }

/// Validity for evaluation: equal nonzero degree, in-range pairwise distinct
/// orders, and equal summed orders on both sides.
inline void validate_spec(const MonomialSpec& spec) {
  if (spec.numerator.empty() || spec.numerator.size() != spec.denominator.size()) {
    throw InvalidSpec("numerator and denominator need the same nonzero number of factors: " + to_string(spec));
  }
  int top = 0;
  int bottom = 0;
  for (const auto* side : {&spec.numerator, &spec.denominator}) {
    for (const auto& t : *side) {
      for (int order : {t.i, t.j, t.k}) {
        if (order < 0 || order > kMaxDerivativeOrder) throw InvalidSpec("derivative order out of range: " + to_string(spec));
      }
      if (!t.distinct()) throw InvalidSpec("repeated derivative order in a factor: " + to_string(spec));
    }
  }
  for (const auto& t : spec.numerator) top += t.order_sum();
  for (const auto& t : spec.denominator) bottom += t.order_sum();
  if (top != bottom) throw InvalidSpec("summed orders differ, time scale does not cancel: " + to_string(spec));
}

inline bool is_valid_spec(const MonomialSpec& spec) {
  try {
    validate_spec(spec);
    return true;
  } catch (const InvalidSpec&) {
    return false;
  }
}

struct RatioParts {
  double numerator = 1.0;
  double denominator = 1.0;

  double exact() const { return numerator / denominator; }
  bool degenerate() const { return !(std::abs(denominator) > kDegenerateDenominator); }
};

/// The two determinant products, without epsilon. Does not validate.
inline RatioParts ratio_parts(const DerivativeFrame& stack, const MonomialSpec& spec) {
  RatioParts parts;
  for (const auto& t : spec.numerator) parts.numerator *= det_m(stack, t);
  for (const auto& t : spec.denominator) parts.denominator *= det_m(stack, t);
  return parts;
}

/// prod det(numerator) / (prod det(denominator) + epsilon).
inline double rational_invariant(const DerivativeFrame& stack, const MonomialSpec& spec,
                                 const InvariantConfig& config = {}) {
  validate_spec(spec);
  validate_config(config);
  const RatioParts parts = ratio_parts(stack, spec);
  return parts.numerator / (parts.denominator + config.epsilon);
}

/// The eight selected invariants, in feature channel order:
///   023/014, 123/024, 034/124,
///   012*023/013^2, 013*123/014^2, 023*124/123^2, 123*134/124^2, 124*234/134^2
inline const std::array<MonomialSpec, kInvariantCount>& stdadi_specs() {
  static const std::array<MonomialSpec, kInvariantCount> specs = {
      MonomialSpec{{{0, 2, 3}}, {{0, 1, 4}}},
      MonomialSpec{{{1, 2, 3}}, {{0, 2, 4}}},
      MonomialSpec{{{0, 3, 4}}, {{1, 2, 4}}},
      MonomialSpec{{{0, 1, 2}, {0, 2, 3}}, {{0, 1, 3}, {0, 1, 3}}},
      MonomialSpec{{{0, 1, 3}, {1, 2, 3}}, {{0, 1, 4}, {0, 1, 4}}},
      MonomialSpec{{{0, 2, 3}, {1, 2, 4}}, {{1, 2, 3}, {1, 2, 3}}},
      MonomialSpec{{{1, 2, 3}, {1, 3, 4}}, {{1, 2, 4}, {1, 2, 4}}},
      MonomialSpec{{{1, 2, 4}, {2, 3, 4}}, {{1, 3, 4}, {1, 3, 4}}},
  };
  return specs;
}

/// Eight invariants at one frame. No squashing.
inline InvariantVector stdadi8(const DerivativeFrame& frame, const InvariantConfig& config = {}) {
  validate_config(config);
  // The ten determinants are shared across the eight ratios.
  std::array<std::array<std::array<double, 5>, 5>, 5> dets{};
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int k = j + 1; k < 5; ++k) dets[i][j][k] = triple_product(frame, i, j, k);
  InvariantVector out{};
  const auto& specs = stdadi_specs();
  for (std::size_t n = 0; n < kInvariantCount; ++n) {
    double top = 1.0;
    double bottom = 1.0;
    for (const auto& t : specs[n].numerator) top *= dets[t.i][t.j][t.k];
    for (const auto& t : specs[n].denominator) bottom *= dets[t.i][t.j][t.k];
    out[n] = top / (bottom + config.epsilon);
  }
  return out;
}

inline InvariantVector stdadi8(const DerivativeStack& stack, std::size_t t, const InvariantConfig& config = {}) {
  if (t >= stack.size()) throw std::out_of_range("frame index outside derivative stack");
  return stdadi8(stack[t], config);
}

/// tanh with the result kept strictly inside (-1, 1).
inline double squash_value(double x) {
  constexpr double kBelowOne = 0x1.fffffffffffffp-1;
  return std::clamp(std::tanh(x), -kBelowOne, kBelowOne);
}

/// Per frame, body and joint invariant vectors, laid out like SkeletonSequence.
struct InvariantGrid {
  std::size_t frames = 0;
  std::size_t bodies = 0;
  std::size_t joints = 0;
  std::vector<InvariantVector> values;

  InvariantGrid() = default;
  InvariantGrid(std::size_t frames_, std::size_t bodies_, std::size_t joints_)
      : frames(frames_), bodies(bodies_), joints(joints_), values(frames_ * bodies_ * joints_, InvariantVector{}) {}

  InvariantVector& at(std::size_t f, std::size_t b, std::size_t j) { return values[(f * bodies + b) * joints + j]; }
  const InvariantVector& at(std::size_t f, std::size_t b, std::size_t j) const {
    return values[(f * bodies + b) * joints + j];
  }
};

/// Concatenates coordinates and (squashed) invariants along the channel axis.
/// Slots where the body is absent are zero in every channel.
inline FeatureTensor augment_channels(const SkeletonSequence& seq, const InvariantGrid& invariants,
                                      const InvariantConfig& config = {}) {
  validate_config(config);
  if (invariants.frames != seq.frame_count || invariants.bodies != seq.body_count ||
      invariants.joints != seq.joint_count || invariants.values.size() != seq.frame_count * seq.body_count * seq.joint_count) {
    throw ShapeMismatch("invariant grid shape does not match the skeleton sequence");
  }
  FeatureTensor out(seq.frame_count, seq.joint_count, seq.body_count);
  for (std::size_t f = 0; f < seq.frame_count; ++f) {
    for (std::size_t b = 0; b < seq.body_count; ++b) {
      if (!seq.present(f, b)) continue;
      for (std::size_t j = 0; j < seq.joint_count; ++j) {
        const std::size_t o = seq.offset(f, b, j);
        for (std::size_t c = 0; c < kCoordinateChannels; ++c) out.at(c, f, j, b) = seq.positions[o + c];
        const auto& v = invariants.at(f, b, j);
        for (std::size_t n = 0; n < kInvariantCount; ++n) {
          out.at(kCoordinateChannels + n, f, j, b) = config.squash == Squash::tanh ? squash_value(v[n]) : v[n];
        }
      }
    }
  }
  return out;
}

}  // namespace stdadi
