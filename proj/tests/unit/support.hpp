#pragma once

#include "artc/dataset.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace artc::fixtures {

inline std::string data_path(const std::string& name) { return std::string(ARTC_TEST_DATA) + "/" + name; }

inline Dataset golden() { return load_csv(data_path("golden_alignment.csv"), ColumnSchema{"Y", {"AB", "C"}, std::nullopt}); }

/// Random factorial dataset: `per_cell` rows per cell, optionally one extra
/// row in a few cells so the data are mildly unbalanced. Responses are
/// rounded to one decimal so ties occur.
inline Dataset random_dataset(std::mt19937_64& rng, const std::vector<int>& counts, int per_cell, bool unbalanced,
                              bool ties = true) {
  std::normal_distribution<double> normal;
  std::bernoulli_distribution extra(0.25);
  std::vector<FactorSpec> factors;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    FactorSpec f{std::string(1, static_cast<char>('A' + j)), {}};
    for (int l = 1; l <= counts[j]; ++l) f.levels.push_back(f.name + std::to_string(l));
    factors.push_back(f);
  }
  std::vector<Condition> rows;
  Condition cell(counts.size(), 0);
  while (true) {
    const int k = per_cell + ((unbalanced && extra(rng)) ? 1 : 0);
    for (int r = 0; r < k; ++r) rows.push_back(cell);
    int j = static_cast<int>(counts.size()) - 1;
    for (; j >= 0 && ++cell[j] == counts[j]; --j) cell[j] = 0;
    if (j < 0) break;
  }
  Eigen::MatrixXi levels(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(counts.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < counts.size(); ++j)
      levels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    const double v = 3.0 * normal(rng) + rows[i][0];
    y[static_cast<Eigen::Index>(i)] = ties ? std::round(v * 10.0) / 10.0 : v;
  }
  return make_dataset(std::move(factors), std::move(levels), std::move(y));
}

/// Binomial coefficient as a double.
inline double choose(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace artc::fixtures
