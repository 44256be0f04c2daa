#pragma once

#include "artc/dataset.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace artc {

enum class Coding {
  /// reference level = first level; indicator columns for the others
  treatment,
  /// effects coding; the last level gets -1 in every column
  sum,
};

/// Full-factorial fixed-effects design with intercept. Columns are grouped by
/// term: the intercept, then every nonempty factor subset in order of size and
/// then position (A, B, A:B, ...). With complete cells the design is saturated,
/// so p equals the number of cells.
class FactorialDesign {
public:
  FactorialDesign() = default;
  FactorialDesign(std::vector<int> level_counts, Coding coding);

  /// Terms as factor-position lists; terms()[0] is the empty intercept term.
  const std::vector<std::vector<int>>& terms() const { return terms_; }
  /// First column of each term, plus one past the end as the last entry.
  const std::vector<Eigen::Index>& term_offsets() const { return offsets_; }
  Eigen::Index columns() const { return offsets_.back(); }
  const std::vector<int>& level_counts() const { return level_counts_; }
  Coding coding() const { return coding_; }

  /// Index of the term with exactly these factor positions (sorted), or -1.
  int find_term(std::vector<int> positions) const;

  /// Design row for one cell.
  Eigen::RowVectorXd row(const Condition& cell) const;
  /// n x p model matrix for the rows of `data`.
  Eigen::MatrixXd model_matrix(const Dataset& data) const;

  /// Every cell of the layout, last factor varying fastest.
  std::vector<Condition> cells() const;

private:
  std::vector<int> level_counts_;
  Coding coding_ = Coding::treatment;
  std::vector<std::vector<int>> terms_;
  std::vector<Eigen::Index> offsets_;
};

/// Per-factor coding block for one level: (levels - 1) entries.
Eigen::RowVectorXd coding_row(int level, int level_count, Coding coding);

}  // namespace artc
