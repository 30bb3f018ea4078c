#pragma once

// Candidate rational invariants within bounded degree and derivative order,
// and a numerical audit of their functional independence.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "stdadi/invariants.hpp"
#include "stdadi/parallel.hpp"

namespace stdadi {

/// Total reported for degree <= 2 and order <= 4 in the original work. Our
/// canonicalization yields a different count; both are printed side by side.
inline constexpr std::size_t kReferenceSpecCount = 55;

/// Canonical form: every triple strictly increasing, each side sorted, the
/// sides share no triple, and the lexicographically smaller side is the
/// numerator (a spec and its reciprocal are one entry).
inline bool is_canonical(const MonomialSpec& spec) {
  if (!is_valid_spec(spec)) return false;
  for (const auto* side : {&spec.numerator, &spec.denominator}) {
    if (!std::is_sorted(side->begin(), side->end())) return false;
    for (const auto& t : *side) {
      if (!t.sorted()) return false;
    }
  }
  for (const auto& t : spec.numerator) {
    if (std::find(spec.denominator.begin(), spec.denominator.end(), t) != spec.denominator.end()) return false;
  }
  return spec.numerator < spec.denominator;
}

inline MonomialSpec reciprocal(const MonomialSpec& spec) { return {spec.denominator, spec.numerator}; }

namespace detail {

inline void multisets(const std::vector<IndexTriple>& items, std::size_t size, std::size_t start,
                      std::vector<IndexTriple>& current, std::vector<std::vector<IndexTriple>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < items.size(); ++i) {
    current.push_back(items[i]);
    multisets(items, size, i, current, out);
    current.pop_back();
  }
}

}  // namespace detail

/// All canonical specs of degree 1..max_degree using orders 0..max_order,
/// ordered by degree, then numerator, then denominator.
inline std::vector<MonomialSpec> enumerate_specs(int max_degree, int max_order) {
  if (max_degree < 1) throw std::invalid_argument("max_degree must be at least 1");
  if (max_order < 2) throw std::invalid_argument("max_order must be at least 2");
  if (max_order > kMaxDerivativeOrder) {
    throw std::invalid_argument("max_order above " + std::to_string(kMaxDerivativeOrder) + " is not supported");
  }

  std::vector<IndexTriple> triples;
  for (int i = 0; i <= max_order; ++i)
    for (int j = i + 1; j <= max_order; ++j)
      for (int k = j + 1; k <= max_order; ++k) triples.push_back({i, j, k});

  std::vector<MonomialSpec> specs;
  for (int degree = 1; degree <= max_degree; ++degree) {
    std::vector<std::vector<IndexTriple>> sides;
    std::vector<IndexTriple> current;
    detail::multisets(triples, static_cast<std::size_t>(degree), 0, current, sides);
    std::sort(sides.begin(), sides.end());

    // Group by summed order; only equal sums can pair.
    std::map<int, std::vector<const std::vector<IndexTriple>*>> by_sum;
    for (const auto& side : sides) {
      int sum = 0;
      for (const auto& t : side) sum += t.order_sum();
      by_sum[sum].push_back(&side);
    }
    std::vector<MonomialSpec> level;
    for (const auto& [sum, group] : by_sum) {
      for (std::size_t a = 0; a < group.size(); ++a) {
        for (std::size_t b = a + 1; b < group.size(); ++b) {
          MonomialSpec spec{*group[a], *group[b]};
          if (is_canonical(spec)) level.push_back(std::move(spec));
        }
      }
    }
    std::sort(level.begin(), level.end(), [](const MonomialSpec& x, const MonomialSpec& y) {
      return std::tie(x.numerator, x.denominator) < std::tie(y.numerator, y.denominator);
    });
    specs.insert(specs.end(), level.begin(), level.end());
  }
  return specs;
}

/// Position (1-based) of the spec among the eight feature invariants, also
/// matching when the spec is the reciprocal of one of them.
struct ReferenceMatch {
  std::size_t index = 0;
  bool reciprocal = false;
};

inline std::optional<ReferenceMatch> match_feature_invariant(const MonomialSpec& spec) {
  auto normalized = [](MonomialSpec s) {
    std::sort(s.numerator.begin(), s.numerator.end());
    std::sort(s.denominator.begin(), s.denominator.end());
    return s;
  };
  const MonomialSpec mine = normalized(spec);
  const auto& specs = stdadi_specs();
  for (std::size_t n = 0; n < specs.size(); ++n) {
    const MonomialSpec ref = normalized(specs[n]);
    if (mine == ref) return ReferenceMatch{n + 1, false};
    if (mine == reciprocal(ref)) return ReferenceMatch{n + 1, true};
  }
  return std::nullopt;
}

struct RankReport {
  std::size_t trials = 0;
  std::size_t spec_count = 0;
  std::vector<int> ranks;
  int modal_rank = 0;
  std::size_t trials_at_full_rank = 0;
  std::size_t resamples = 0;
};

struct RankOptions {
  double relative_step = 1e-6;
  double rank_threshold = 1e-8;
  unsigned threads = 1;
};

/// Numerical rank of d(spec values)/d(stack entries) at random generic 3x5
/// stacks. Each trial draws standard-normal entries from a generator seeded
/// by (seed, trial), redrawing while any denominator is at or below 1e-6.
/// The Jacobian uses central differences; rows are scaled to unit norm before
/// counting singular values above threshold * largest.
inline RankReport independence_rank(const std::vector<MonomialSpec>& specs, std::size_t trials, std::uint64_t seed,
                                    const RankOptions& options = {}) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (specs.empty()) throw std::invalid_argument("no specs to audit");
  for (const auto& spec : specs) validate_spec(spec);

  RankReport report;
  report.trials = trials;
  report.spec_count = specs.size();
  report.ranks.assign(trials, 0);
  std::vector<std::size_t> redraws(trials, 0);

  parallel_for(trials, options.threads, [&](std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), 0x1d3u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto values = [&](const DerivativeFrame& frame) {
      Eigen::VectorXd out(static_cast<Eigen::Index>(specs.size()));
      for (std::size_t n = 0; n < specs.size(); ++n) out[static_cast<Eigen::Index>(n)] = ratio_parts(frame, specs[n]).exact();
      return out;
    };

    DerivativeFrame frame;
    for (;;) {
      for (int e = 0; e < frame.size(); ++e) frame.data()[e] = normal(rng);
      bool degenerate = false;
      for (const auto& spec : specs) degenerate = degenerate || ratio_parts(frame, spec).degenerate();
      if (!degenerate) break;
      ++redraws[trial];
    }

    Eigen::MatrixXd jacobian(static_cast<Eigen::Index>(specs.size()), frame.size());
    for (int e = 0; e < frame.size(); ++e) {
      const double h = options.relative_step * std::max(1.0, std::abs(frame.data()[e]));
      DerivativeFrame plus = frame;
      DerivativeFrame minus = frame;
      plus.data()[e] += h;
      minus.data()[e] -= h;
      jacobian.col(e) = (values(plus) - values(minus)) / (2.0 * h);
    }
    for (Eigen::Index r = 0; r < jacobian.rows(); ++r) {
      const double norm = jacobian.row(r).norm();
      if (norm > 0.0) jacobian.row(r) /= norm;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
    const auto& sigma = svd.singularValues();
    int rank = 0;
    if (sigma.size() > 0 && sigma[0] > 0.0) {
      for (Eigen::Index s = 0; s < sigma.size(); ++s) rank += sigma[s] > options.rank_threshold * sigma[0] ? 1 : 0;
    }
    report.ranks[trial] = rank;
  });

  std::map<int, std::size_t> histogram;
  for (int r : report.ranks) ++histogram[r];
  std::size_t best = 0;
  for (const auto& [rank, count] : histogram) {
    if (count > best || (count == best && rank > report.modal_rank)) {
      best = count;
      report.modal_rank = rank;
    }
  }
  report.trials_at_full_rank = histogram[static_cast<int>(specs.size())];
  for (auto r : redraws) report.resamples += r;
  return report;
}

}  // namespace stdadi
