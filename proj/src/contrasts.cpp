#include "artc/distributions.hpp"
#include "artc/errors.hpp"
#include "artc/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace artc {

Eigen::MatrixXd marginal_mean_weights(const FactorialDesign& design, int factor) {
  const int levels = design.level_counts().at(static_cast<std::size_t>(factor));
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(levels, design.columns());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(levels);
  for (const Condition& cell : design.cells()) {
    weights.row(cell[factor]) += design.row(cell);
    counts[cell[factor]] += 1.0;
  }
  return counts.cwiseInverse().asDiagonal() * weights;
}

std::vector<ContrastResult> pairwise_from_fit(const FittedModel& model, int factor,
                                              std::span<const std::string> level_labels, AdjustMethod adjust) {
  const Eigen::MatrixXd weights = marginal_mean_weights(model.design, factor);
  const int levels = static_cast<int>(weights.rows());
  if (static_cast<int>(level_labels.size()) != levels) throw InvalidArgumentError("level label count mismatch");
  const double scale = std::max(1.0, model.beta.cwiseAbs().maxCoeff());

  std::vector<ContrastResult> out;
  for (int i = 0; i < levels; ++i) {
    for (int j = i + 1; j < levels; ++j) {
      const Eigen::RowVectorXd l = weights.row(i) - weights.row(j);
      ContrastResult r;
      r.contrast = level_labels[i] + " - " + level_labels[j];
      r.level1 = i;
      r.level2 = j;
      r.estimate = l.dot(model.beta);
      r.se = std::sqrt(std::max(0.0, (l * model.cov_beta * l.transpose())(0, 0)));
      r.df = model.df_contrast;
      if (r.se > 1e-12 * scale) {
        r.t_ratio = r.estimate / r.se;
      } else if (std::abs(r.estimate) <= 1e-9 * scale) {
        r.t_ratio = 0.0;
      } else {
        r.t_ratio = std::copysign(std::numeric_limits<double>::infinity(), r.estimate);
      }
      r.p = t_two_sided_p(r.t_ratio, r.df);
      out.push_back(std::move(r));
    }
  }

  std::vector<double> raw;
  for (const auto& r : out) raw.push_back(r.p);
  const auto adjusted = adjust_pvalues(raw, adjust);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].p_adj = adjusted[k];
  return out;
}

std::vector<ContrastResult> pairwise_contrasts(const Dataset& data, const ContrastSpec& spec, DesignKind kind,
                                               AlignmentKind alignment, const FitOptions& options) {
  validate(spec, data);
  require_complete_cells(data);
  const Dataset joined = concat_factors(data, spec.target_factors);
  const AlignedColumns aligned = alignment == AlignmentKind::artc ? align_artc(data, spec.target_factors)
                                                                  : align_art_effect(data, spec.target_factors);
  const FittedModel model = fit_model(joined, aligned.y_double_prime, kind, options);
  return pairwise_from_fit(model, 0, joined.factors[0].levels, spec.adjust);
}

std::vector<double> adjust_pvalues(std::span<const double> p, AdjustMethod method) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgumentError("p-value outside [0, 1]");
  std::vector<double> out(p.begin(), p.end());
  const auto m = static_cast<double>(p.size());
  switch (method) {
    case AdjustMethod::none:
      break;
    case AdjustMethod::bonferroni:
      for (double& v : out) v = std::min(1.0, m * v);
      break;
    case AdjustMethod::holm: {
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
      double running = 0.0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        running = std::max(running, (m - static_cast<double>(k)) * p[order[k]]);
        out[order[k]] = std::min(1.0, running);
      }
      break;
    }
  }
  return out;
}

std::vector<ContrastFamily> enumerate_contrast_families(std::span<const int> level_counts) {
  const int n = static_cast<int>(level_counts.size());
  std::vector<unsigned> masks;
  for (unsigned mask = 1; mask < (1u << n); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(),
                   [](unsigned a, unsigned b) { return std::popcount(a) < std::popcount(b); });

  std::vector<ContrastFamily> out;
  for (unsigned mask : masks) {
    ContrastFamily family;
    std::int64_t combos = 1;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) {
        family.factors.push_back(j);
        combos *= level_counts[j];
      }
    family.pairs = combos * (combos - 1) / 2;
    out.push_back(std::move(family));
  }
  return out;
}

}  // namespace artc
