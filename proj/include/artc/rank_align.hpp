#pragma once

#include "artc/dataset.hpp"
#include "artc/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace artc {

/// Ascending midranks (1-based). Tied values share the mean of the ranks they
/// span, so the ranks sum to n(n+1)/2. By default values tie only when exactly
/// equal; with `tie_tolerance` > 0 a run of sorted values within that distance
/// of the run's smallest value counts as one tie group.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> midrank(const Eigen::DenseBase<Derived>& values,
                                                                   typename Derived::Scalar tie_tolerance = 0) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) throw InvalidArgumentError("midrank of an empty sample");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && (values(order[j]) == values(order[i]) || values(order[j]) - values(order[i]) <= tie_tolerance))
      ++j;
    // positions i..j-1 hold ranks i+1..j
    const Scalar rank = Scalar(i + 1 + j) / Scalar(2);
    for (Eigen::Index k = i; k < j; ++k) ranks(order[k]) = rank;
    i = j;
  }
  return ranks;
}

inline Eigen::VectorXd midrank(std::span<const double> values) {
  return midrank(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

/// Replaces the target factors by one factor whose levels are the observed
/// combinations, labelled "lvlA,lvlB,...". The new factor comes first and is
/// named by joining the target names ("A","B" -> "AB"); the other factors keep
/// their relative order.
Dataset concat_factors(const Dataset& data, std::span<const std::string> target_factors);

enum class AlignmentKind { artc, art };

struct AlignedColumns {
  AlignmentKind kind = AlignmentKind::artc;
  std::vector<std::string> target_factors;
  Eigen::VectorXd y_prime;
  Eigen::VectorXd y_double_prime;

  /// "A:B" for a family/effect over factors A and B.
  std::string target() const;
};

/// Means used by the ART-C alignment, as per-row lookups and per-group tables.
struct CellMeanTable {
  /// mean of Y over the row's full cell (one level of every factor)
  Eigen::VectorXd cell_mean;
  /// mean of Y over the row's level of the concatenated target factors
  Eigen::VectorXd target_mean;
  double grand_mean = 0.0;

  std::map<Condition, double> cells;
  std::map<Condition, double> targets;
  std::map<Condition, Eigen::Index> cell_counts;
};

/// Unweighted per-group means of `y`, returned as one value per row.
Eigen::VectorXd group_means(const Dataset& data, const Eigen::VectorXd& y, std::span<const int> positions);

CellMeanTable cell_means(const Dataset& data, std::span<const int> target_positions);

/// Midranks of aligned responses. Alignment sums cell means in different
/// orders, so values that are equal in exact arithmetic can differ by a few
/// ulps; those are treated as ties (relative tolerance 1e-9 of max |Y'|).
Eigen::VectorXd rank_aligned(const Eigen::VectorXd& y_prime);

/// ART-C alignment for contrasts among combinations of the target factors:
///   Y' = Y - mean(full cell) + mean(target combination) - grand mean
/// followed by joint midranking of Y'.
AlignedColumns align_artc(const Dataset& data, std::span<const std::string> target_factors);

/// Classic ART alignment for one effect (main effect or interaction):
///   Y' = (Y - mean(full cell)) + estimated effect
/// where the effect is the alternating-sign sum of marginal means over all
/// subsets of the effect's factors (the empty subset being the grand mean).
AlignedColumns align_art_effect(const Dataset& data, std::span<const std::string> effect_factors);

}  // namespace artc
