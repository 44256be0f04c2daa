#include "artc/distributions.hpp"
#include "artc/errors.hpp"
#include "artc/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace artc {

RandomInterceptReml::RandomInterceptReml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         const Eigen::VectorXi& subject, int subject_count)
    : n_(x.rows()),
      x_(x),
      y_(y),
      subject_(subject),
      xtx_(x.transpose() * x),
      xty_(x.transpose() * y),
      x_sums_(Eigen::MatrixXd::Zero(x.cols(), subject_count)),
      y_sums_(Eigen::VectorXd::Zero(subject_count)),
      sizes_(Eigen::VectorXd::Zero(subject_count)) {
  for (Eigen::Index i = 0; i < n_; ++i) {
    const int s = subject[i];
    x_sums_.col(s) += x.row(i).transpose();
    y_sums_[s] += y[i];
    sizes_[s] += 1.0;
  }
}

RandomInterceptReml::Solution RandomInterceptReml::solve(double theta) const {
  // V_s^-1 = I - w_s 11' with w_s = theta / (1 + theta m_s)
  const Eigen::ArrayXd w = theta / (1.0 + theta * sizes_.array());

  Solution sol;
  sol.xtvx = xtx_ - x_sums_ * w.matrix().asDiagonal() * x_sums_.transpose();
  const Eigen::VectorXd xtvy = xty_ - x_sums_ * (w * y_sums_.array()).matrix();

  const Eigen::LLT<Eigen::MatrixXd> llt(sol.xtvx);
  if (llt.info() != Eigen::Success) throw EstimabilityError("X'V^-1X is not positive definite");
  sol.beta = llt.solve(xtvy);
  // Residuals directly rather than y'V^-1y - b'beta, which cancels badly
  // when the fit is nearly exact.
  const Eigen::VectorXd r = y_ - x_ * sol.beta;
  Eigen::VectorXd r_sums = Eigen::VectorXd::Zero(sizes_.size());
  for (Eigen::Index i = 0; i < n_; ++i) r_sums[subject_[i]] += r[i];
  sol.rss = std::max(0.0, r.squaredNorm() - (w * r_sums.array().square()).sum());
  sol.log_det_v = (1.0 + theta * sizes_.array()).log().sum();
  sol.log_det_xtvx = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return sol;
}

double RandomInterceptReml::deviance(const Solution& sol) const {
  const double dof = static_cast<double>(n_ - columns());
  return dof * (1.0 + std::log(2.0 * std::numbers::pi * sol.rss / dof)) + sol.log_det_v + sol.log_det_xtvx;
}

double RandomInterceptReml::deviance(double theta) const { return deviance(solve(theta)); }

namespace {

template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

void require_within_grid(const Dataset& data) {
  if (!data.has_subject()) throw DesignError("within-subjects analysis needs a subject column");
  const auto cells = data.full_cell_count();
  std::vector<std::int64_t> per_subject(static_cast<std::size_t>(data.subject_count()), 0);
  for (Eigen::Index i = 0; i < data.rows(); ++i) ++per_subject[data.subject[i]];
  for (std::size_t s = 0; s < per_subject.size(); ++s)
    if (per_subject[s] != cells)
      throw DesignError("subject '" + data.subject_labels[s] + "' has " + std::to_string(per_subject[s]) +
                        " observations; within-subjects analysis needs exactly one per condition (" +
                        std::to_string(cells) + ")");
}

std::vector<int> level_counts_of(const Dataset& data) {
  std::vector<int> counts;
  for (const auto& f : data.factors) counts.push_back(f.level_count());
  return counts;
}

}  // namespace

FittedModel fit_model(const Dataset& data, const Eigen::VectorXd& y, DesignKind kind, const FitOptions& options) {
  require_complete_cells(data);
  if (y.size() != data.rows()) throw InvalidArgumentError("response length does not match dataset rows");
  if (kind == DesignKind::within) require_within_grid(data);

  FittedModel model;
  model.design = FactorialDesign(level_counts_of(data), options.coding);
  model.kind = kind;
  model.n = data.rows();
  model.p = model.design.columns();
  model.s = kind == DesignKind::within ? data.subject_count() : 0;

  const Eigen::MatrixXd x = model.design.model_matrix(data);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < model.p) throw EstimabilityError("design matrix is rank deficient");

  model.df_contrast = kind == DesignKind::within ? static_cast<double>(model.n - model.p - (model.s - 1))
                                                 : static_cast<double>(model.n - model.p);
  if (model.df_contrast < 1.0) throw EstimabilityError("no residual degrees of freedom left");

  Eigen::VectorXi subject = kind == DesignKind::within ? data.subject : Eigen::VectorXi::Zero(model.n);
  const RandomInterceptReml reml(x, y, subject, kind == DesignKind::within ? model.s : 1);

  const double residual_dof = static_cast<double>(model.n - model.p);
  auto finish = [&](double theta) {
    const auto sol = reml.solve(theta);
    model.theta = theta;
    model.beta = sol.beta;
    model.sigma2 = sol.rss / residual_dof;
    const Eigen::MatrixXd inv = sol.xtvx.llt().solve(Eigen::MatrixXd::Identity(model.p, model.p));
    model.cov_beta = model.sigma2 * 0.5 * (inv + inv.transpose());
    if (kind == DesignKind::within && !model.degenerate) model.reml_criterion = reml.deviance(sol);
  };

  // No residual variation: ranks are constant within every cell.
  const auto ols = reml.solve(0.0);
  if (ols.rss <= 1e-24 * std::max(1.0, y.squaredNorm())) {
    model.degenerate = true;
    finish(0.0);
    return model;
  }

  if (kind == DesignKind::between) {
    finish(0.0);
    return model;
  }

  if (options.fixed_theta) {
    if (!(*options.fixed_theta >= 0.0)) throw InvalidArgumentError("fixed theta must be >= 0");
    finish(*options.fixed_theta);
    model.singular = *options.fixed_theta == 0.0;
    return model;
  }

  const double lo = options.log_theta_lower;
  const double hi = options.log_theta_upper;
  auto objective = [&](double log_theta) {
    const double value = reml.deviance(std::exp(log_theta));
    if (!std::isfinite(value)) throw NonConvergenceError("REML criterion is not finite at log(theta) = " +
                                                         std::to_string(log_theta));
    return value;
  };
  const double best = golden_section_minimize(objective, lo, hi, options.log_theta_tolerance);
  const double edge = 10.0 * options.log_theta_tolerance;

  if (hi - best < edge)
    throw NonConvergenceError("variance ratio search ran into the upper bound (log theta = " + std::to_string(hi) +
                              ")");
  if (best - lo < edge) {
    // Optimum on the boundary theta = 0 (singular fit), as long as theta = 0 is no worse.
    const double at_zero = reml.deviance(0.0);
    if (!std::isfinite(at_zero)) throw NonConvergenceError("REML criterion is not finite at theta = 0");
    if (at_zero <= objective(best) + 1e-9) {
      finish(0.0);
      model.singular = true;
      return model;
    }
  }
  finish(std::exp(best));
  return model;
}

std::string AnovaRow::label() const {
  std::string out;
  for (std::size_t i = 0; i < effect.size(); ++i) {
    if (i) out += ':';
    out += effect[i];
  }
  return out;
}

AnovaRow term_f_test(const FittedModel& model, int term_index) {
  const auto& offsets = model.design.term_offsets();
  if (term_index <= 0 || term_index >= static_cast<int>(model.design.terms().size()))
    throw InvalidArgumentError("term index out of range");
  const Eigen::Index first = offsets[term_index];
  const Eigen::Index q = offsets[term_index + 1] - first;

  AnovaRow row;
  row.df_num = static_cast<double>(q);
  row.df_den = model.df_contrast;

  const Eigen::VectorXd b = model.beta.segment(first, q);
  if (model.degenerate || model.sigma2 <= 0.0) {
    // Constant ranks: nothing to test.
    const bool zero = b.norm() <= 1e-9 * std::max(1.0, model.beta.norm());
    row.F = zero ? 0.0 : std::numeric_limits<double>::infinity();
    row.p = zero ? 1.0 : 0.0;
    return row;
  }
  const Eigen::MatrixXd cov = model.cov_beta.block(first, first, q, q);
  const double quad = b.dot(cov.ldlt().solve(b));
  row.F = std::max(0.0, quad / static_cast<double>(q));
  row.p = f_upper_p(row.F, row.df_num, row.df_den);
  return row;
}

std::vector<AnovaRow> anova_on_art(const Dataset& data, DesignKind kind, const FitOptions& options) {
  require_complete_cells(data);
  FitOptions sum_coded = options;
  sum_coded.coding = Coding::sum;

  const FactorialDesign design(level_counts_of(data), Coding::sum);
  std::vector<AnovaRow> rows;
  for (std::size_t t = 1; t < design.terms().size(); ++t) {
    std::vector<std::string> names;
    for (int j : design.terms()[t]) names.push_back(data.factors[j].name);
    const AlignedColumns aligned = align_art_effect(data, names);
    const FittedModel model = fit_model(data, aligned.y_double_prime, kind, sum_coded);
    AnovaRow row = term_f_test(model, static_cast<int>(t));
    row.effect = std::move(names);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace artc
