#pragma once

#include "artc/dataset.hpp"
#include "artc/design.hpp"
#include "artc/rank_align.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace artc {

struct FitOptions {
  Coding coding = Coding::treatment;
  /// Bracket for the golden-section search over log(theta).
  double log_theta_lower = -12.0;
  double log_theta_upper = 12.0;
  double log_theta_tolerance = 1e-8;
  /// Skip the search and fit at this variance ratio (within-subjects only).
  std::optional<double> fixed_theta;
};

/// Full-factorial fit of one response column. Between-subjects: OLS.
/// Within-subjects: random intercept per subject, V(theta) = I + theta Z Z',
/// fit by REML with sigma^2 profiled out.
struct FittedModel {
  FactorialDesign design;
  DesignKind kind = DesignKind::between;
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_beta;
  double sigma2 = 0.0;
  /// subject variance / residual variance; 0 for between-subjects
  double theta = 0.0;
  /// containment degrees of freedom used for contrast and F tests
  double df_contrast = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  int s = 0;
  /// REML deviance at theta (within-subjects only)
  double reml_criterion = 0.0;
  /// the REML optimum sat on theta = 0
  bool singular = false;
  /// the response has no residual variation at all
  bool degenerate = false;
};

/// Grouped evaluation of the profiled REML deviance for the random-intercept
/// model. V is block diagonal with blocks I + theta 11', so X'V^-1X comes
/// from per-subject column sums and each evaluation is O(n p + subjects p^2).
class RandomInterceptReml {
public:
  RandomInterceptReml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXi& subject,
                      int subject_count);

  struct Solution {
    Eigen::VectorXd beta;
    /// X' V^-1 X
    Eigen::MatrixXd xtvx;
    /// r' V^-1 r
    double rss = 0.0;
    double log_det_v = 0.0;
    double log_det_xtvx = 0.0;
  };

  Solution solve(double theta) const;
  /// (n-p)(1 + log(2 pi rss/(n-p))) + log|V| + log|X'V^-1X|
  double deviance(double theta) const;
  double deviance(const Solution& solution) const;

  Eigen::Index rows() const { return n_; }
  Eigen::Index columns() const { return xtx_.rows(); }

private:
  Eigen::Index n_ = 0;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXi subject_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  /// per subject: column sums of X, sum of y, row count
  Eigen::MatrixXd x_sums_;
  Eigen::VectorXd y_sums_;
  Eigen::VectorXd sizes_;
};

/// Fits the full factorial over all factors of `data` to the response `y`.
/// Throws EmptyCellError, DesignError (within without a complete subject x
/// condition grid), EstimabilityError, NonConvergenceError.
FittedModel fit_model(const Dataset& data, const Eigen::VectorXd& y, DesignKind kind, const FitOptions& options = {});

struct AnovaRow {
  std::vector<std::string> effect;
  double F = 0.0;
  double df_num = 0.0;
  double df_den = 0.0;
  double p = 1.0;

  std::string label() const;
};

/// Wald F test that every coefficient of one term is zero. Under sum coding
/// this is the Type III test; for OLS it equals the nested model comparison.
AnovaRow term_f_test(const FittedModel& model, int term_index);

/// One aligned-rank ANOVA per effect: align for the effect, fit the full
/// factorial on the ranks, keep only that effect's F test. Effects come in
/// design term order (main effects, then two-way interactions, ...).
std::vector<AnovaRow> anova_on_art(const Dataset& data, DesignKind kind, const FitOptions& options = {});

struct ContrastResult {
  /// "A1,B1 - A1,B2"
  std::string contrast;
  int level1 = 0;
  int level2 = 0;
  double estimate = 0.0;
  double se = 0.0;
  double df = 0.0;
  double t_ratio = 0.0;
  double p = 1.0;
  double p_adj = 1.0;
};

/// levels x p matrix whose rows map beta to the estimated marginal mean of each
/// level of `factor`, averaging predicted cell means over the other factors
/// with equal weights.
Eigen::MatrixXd marginal_mean_weights(const FactorialDesign& design, int factor);

/// Pairwise comparisons of one factor's levels (i < j, level order) from a fit.
std::vector<ContrastResult> pairwise_from_fit(const FittedModel& model, int factor,
                                              std::span<const std::string> level_labels, AdjustMethod adjust);

/// Concatenate the target factors, align (ART-C by default, or the classic ART
/// alignment for the same factor subset), rank, fit the full factorial over
/// {concatenated} + other factors, and compare every pair of concatenated levels.
std::vector<ContrastResult> pairwise_contrasts(const Dataset& data, const ContrastSpec& spec, DesignKind kind,
                                               AlignmentKind alignment = AlignmentKind::artc,
                                               const FitOptions& options = {});

/// holm: step-down with running maximum; bonferroni: min(1, m p); none: identity.
std::vector<double> adjust_pvalues(std::span<const double> p, AdjustMethod method);

struct ContrastFamily {
  std::vector<int> factors;
  std::int64_t pairs = 0;
};

/// Every nonempty factor subset with C(prod of its level counts, 2) pairs,
/// ordered by subset size then position.
std::vector<ContrastFamily> enumerate_contrast_families(std::span<const int> level_counts);

}  // namespace artc
