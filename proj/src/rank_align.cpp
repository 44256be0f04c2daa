#include "artc/rank_align.hpp"

#include "artc/errors.hpp"

#include <set>

namespace artc {

std::string AlignedColumns::target() const {
  std::string out;
  for (std::size_t i = 0; i < target_factors.size(); ++i) {
    if (i) out += ':';
    out += target_factors[i];
  }
  return out;
}

namespace {

std::vector<int> checked_positions(const Dataset& data, std::span<const std::string> names) {
  if (names.empty()) throw InvalidArgumentError("target factor list is empty");
  auto positions = data.factor_positions(names);
  std::set<int> unique(positions.begin(), positions.end());
  if (unique.size() != positions.size()) throw InvalidArgumentError("target factor listed twice");
  return positions;
}

std::vector<int> all_positions(const Dataset& data) {
  std::vector<int> all(static_cast<std::size_t>(data.factor_count()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

}  // namespace

Eigen::VectorXd group_means(const Dataset& data, const Eigen::VectorXd& y, std::span<const int> positions) {
  Eigen::VectorXd out(data.rows());
  if (positions.empty()) {
    out.setConstant(y.mean());
    return out;
  }
  for (const auto& [key, rows] : group_index(data, positions)) {
    double sum = 0.0;
    for (auto r : rows) sum += y[r];
    const double mean = sum / static_cast<double>(rows.size());
    for (auto r : rows) out[r] = mean;
  }
  return out;
}

CellMeanTable cell_means(const Dataset& data, std::span<const int> target_positions) {
  CellMeanTable table;
  const auto all = all_positions(data);
  table.cell_mean = group_means(data, data.response, all);
  table.target_mean = group_means(data, data.response, target_positions);
  table.grand_mean = data.response.mean();
  for (const auto& [key, rows] : group_index(data, all)) {
    table.cells[key] = table.cell_mean[rows.front()];
    table.cell_counts[key] = static_cast<Eigen::Index>(rows.size());
  }
  for (const auto& [key, rows] : group_index(data, target_positions)) table.targets[key] = table.target_mean[rows.front()];
  return table;
}

Dataset concat_factors(const Dataset& data, std::span<const std::string> target_factors) {
  const auto targets = checked_positions(data, target_factors);
  std::set<int> target_set(targets.begin(), targets.end());

  FactorSpec joined;
  for (int t : targets) joined.name += data.factors[t].name;

  std::map<Condition, int> combo_level;
  Eigen::VectorXi joined_levels(data.rows());
  Condition key(targets.size());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (std::size_t k = 0; k < targets.size(); ++k) key[k] = data.levels(i, targets[k]);
    auto [it, inserted] = combo_level.emplace(key, joined.level_count());
    if (inserted) {
      std::string label;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        if (k) label += ',';
        label += data.factors[targets[k]].levels[key[k]];
      }
      joined.levels.push_back(std::move(label));
    }
    joined_levels[i] = it->second;
  }

  std::vector<FactorSpec> factors{joined};
  std::vector<int> kept;
  for (int j = 0; j < data.factor_count(); ++j) {
    if (target_set.contains(j)) continue;
    if (data.factors[j].name == joined.name)
      throw InvalidArgumentError("concatenated factor name '" + joined.name + "' collides with an existing factor");
    factors.push_back(data.factors[j]);
    kept.push_back(j);
  }

  Eigen::MatrixXi levels(data.rows(), static_cast<Eigen::Index>(factors.size()));
  levels.col(0) = joined_levels;
  for (std::size_t k = 0; k < kept.size(); ++k) levels.col(static_cast<Eigen::Index>(k + 1)) = data.levels.col(kept[k]);

  return make_dataset(std::move(factors), std::move(levels), data.response, data.subject_name, data.subject_labels,
                      data.subject, data.response_name);
}

Eigen::VectorXd rank_aligned(const Eigen::VectorXd& y_prime) {
  if (y_prime.size() == 0) throw InvalidArgumentError("midrank of an empty sample");
  return midrank(y_prime, 1e-9 * y_prime.cwiseAbs().maxCoeff());
}

AlignedColumns align_artc(const Dataset& data, std::span<const std::string> target_factors) {
  const auto targets = checked_positions(data, target_factors);
  require_complete_cells(data);

  const CellMeanTable means = cell_means(data, targets);
  AlignedColumns out;
  out.kind = AlignmentKind::artc;
  out.target_factors.assign(target_factors.begin(), target_factors.end());
  const Eigen::VectorXd effect = means.target_mean.array() - means.grand_mean;
  out.y_prime = (data.response - means.cell_mean) + effect;
  out.y_double_prime = rank_aligned(out.y_prime);
  return out;
}

AlignedColumns align_art_effect(const Dataset& data, std::span<const std::string> effect_factors) {
  const auto effect_positions = checked_positions(data, effect_factors);
  require_complete_cells(data);

  const int m = static_cast<int>(effect_positions.size());
  const auto full_mask = (1u << m) - 1u;

  // Inclusion-exclusion: sum over subsets S of the effect of (-1)^(|E|-|S|) mean_S,
  // starting from the full subset and ending with the grand mean.
  Eigen::VectorXd effect = group_means(data, data.response, effect_positions);
  for (unsigned mask = full_mask; mask-- > 0;) {
    std::vector<int> subset;
    for (int k = 0; k < m; ++k)
      if (mask & (1u << k)) subset.push_back(effect_positions[k]);
    const int sign = ((m - static_cast<int>(subset.size())) % 2 == 0) ? 1 : -1;
    if (subset.empty()) {
      const double mu = data.response.mean();
      effect.array() += sign * mu;
    } else {
      effect += sign * group_means(data, data.response, subset);
    }
  }

  const Eigen::VectorXd cell = group_means(data, data.response, all_positions(data));
  AlignedColumns out;
  out.kind = AlignmentKind::art;
  out.target_factors.assign(effect_factors.begin(), effect_factors.end());
  out.y_prime = (data.response - cell) + effect;
  out.y_double_prime = rank_aligned(out.y_prime);
  return out;
}

}  // namespace artc
