#include "artc/design.hpp"

#include "artc/errors.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace artc {

Eigen::RowVectorXd coding_row(int level, int level_count, Coding coding) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(level_count - 1);
  switch (coding) {
    case Coding::treatment:
      if (level > 0) out[level - 1] = 1.0;
      break;
    case Coding::sum:
      if (level == level_count - 1)
        out.setConstant(-1.0);
      else
        out[level] = 1.0;
      break;
  }
  return out;
}

FactorialDesign::FactorialDesign(std::vector<int> level_counts, Coding coding)
    : level_counts_(std::move(level_counts)), coding_(coding) {
  const int n = static_cast<int>(level_counts_.size());
  if (n == 0 || n > 16) throw InvalidArgumentError("factorial design needs between 1 and 16 factors");
  for (int k : level_counts_)
    if (k < 2) throw InvalidArgumentError("every factor needs at least 2 levels");

  std::vector<unsigned> masks;
  for (unsigned mask = 1; mask < (1u << n); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(),
                   [](unsigned a, unsigned b) { return std::popcount(a) < std::popcount(b); });

  terms_.push_back({});
  offsets_.push_back(0);
  Eigen::Index width = 1;
  for (unsigned mask : masks) {
    std::vector<int> term;
    Eigen::Index cols = 1;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) {
        term.push_back(j);
        cols *= level_counts_[j] - 1;
      }
    offsets_.push_back(width);
    terms_.push_back(std::move(term));
    width += cols;
  }
  offsets_.push_back(width);
}

int FactorialDesign::find_term(std::vector<int> positions) const {
  std::sort(positions.begin(), positions.end());
  for (std::size_t t = 0; t < terms_.size(); ++t)
    if (terms_[t] == positions) return static_cast<int>(t);
  return -1;
}

Eigen::RowVectorXd FactorialDesign::row(const Condition& cell) const {
  Eigen::RowVectorXd out(columns());
  out[0] = 1.0;
  for (std::size_t t = 1; t < terms_.size(); ++t) {
    // Kronecker product of the per-factor coding rows, first factor slowest.
    Eigen::RowVectorXd block = Eigen::RowVectorXd::Ones(1);
    for (int j : terms_[t]) {
      const Eigen::RowVectorXd code = coding_row(cell[j], level_counts_[j], coding_);
      Eigen::RowVectorXd next(block.size() * code.size());
      for (Eigen::Index a = 0; a < block.size(); ++a) next.segment(a * code.size(), code.size()) = block[a] * code;
      block = std::move(next);
    }
    out.segment(offsets_[t], block.size()) = block;
  }
  return out;
}

Eigen::MatrixXd FactorialDesign::model_matrix(const Dataset& data) const {
  if (data.factor_count() != static_cast<int>(level_counts_.size()))
    throw InvalidArgumentError("dataset factor count does not match the design");
  // Rows of the same cell share one design row.
  std::map<Condition, Eigen::RowVectorXd> cache;
  Eigen::MatrixXd x(data.rows(), columns());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Condition c = data.condition_of(i);
    auto it = cache.find(c);
    if (it == cache.end()) it = cache.emplace(c, row(c)).first;
    x.row(i) = it->second;
  }
  return x;
}

std::vector<Condition> FactorialDesign::cells() const {
  std::vector<Condition> out;
  Condition c(level_counts_.size(), 0);
  for (;;) {
    out.push_back(c);
    int j = static_cast<int>(c.size()) - 1;
    while (j >= 0 && ++c[j] == level_counts_[j]) c[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

}  // namespace artc
