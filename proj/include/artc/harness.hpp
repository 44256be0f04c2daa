#pragma once

#include "artc/dataset.hpp"
#include "artc/inference.hpp"
#include "artc/simgen.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace artc {

enum class Method { artc, art, t_test, rank_test };
enum class Metric { type_i, power };

std::string to_string(Method method);
std::string to_string(Metric metric);

/// One contrast test result. rank_test is Mann-Whitney U for between-subjects
/// designs and the Wilcoxon signed-rank test for within-subjects designs.
struct TrialRecord {
  SimDesign design;
  std::uint64_t replication = 0;
  Method method = Method::artc;
  /// "A:B"
  std::string family;
  int contrast_size = 1;
  /// "A1,B1 - A1,B2"
  std::string pair;
  double p = 1.0;
  bool rejected = false;

  Metric metric() const { return design.null_true ? Metric::type_i : Metric::power; }
};

struct HarnessOptions {
  int replications = 50;
  double alpha = 0.05;
  std::uint64_t seed = 20210508;
  int workers = 1;
  FitOptions fit;
};

struct GridResult {
  /// Ordered by (grid position, replication, family, method, pair) regardless of worker count.
  std::vector<TrialRecord> records;
  /// datasets removed because a model fit did not converge, per grid position
  std::vector<int> dropped;
  std::vector<int> analyzed;
};

/// Analyses one generated dataset: for every contrast family, ART-C and ART
/// pairwise contrasts (unadjusted) plus the t-test and rank test on the two
/// conditions' raw responses. Returns nullopt when any model fit throws
/// NonConvergenceError, in which case the whole dataset is discarded.
std::optional<std::vector<TrialRecord>> run_replication(const SimDesign& design, std::uint64_t seed,
                                                        std::uint64_t replication, const HarnessOptions& options);

/// Every grid cell x replication; replications are the unit of parallelism.
GridResult run_grid(std::span<const SimDesign> grid, const HarnessOptions& options);

/// The full validation grid: layouts x distributions x sample sizes x
/// between/within, each under the null and with random locations.
std::vector<SimDesign> full_grid();
/// 2x2 normal n = 8, between and within, null and alternative.
std::vector<SimDesign> smoke_grid();

/// Observed Type I error or power for one design (grid cell + contrast size) and method.
struct MetricsRow {
  SimDesign design;
  int contrast_size = 1;
  Method method = Method::artc;
  Metric metric = Metric::type_i;
  double value = 0.0;
  std::int64_t trials = 0;
  std::int64_t rejections = 0;
};

/// Rejected count / trial count per (design, contrast size, method).
std::vector<MetricsRow> per_design_metrics(std::span<const TrialRecord> records);

/// run_grid one grid cell at a time, keeping only per-design metrics, so
/// memory stays bounded on the full grid. `dropped` and `analyzed` receive one
/// entry per grid cell.
std::vector<MetricsRow> run_validation(std::span<const SimDesign> grid, const HarnessOptions& options,
                                       std::vector<int>* dropped = nullptr, std::vector<int>* analyzed = nullptr);

enum class GroupKey { layout, distribution, n, design_kind, contrast_size };
std::string to_string(GroupKey key);

struct SummaryFilter {
  std::optional<Metric> metric;
  bool exclude_cauchy = false;
  /// empty means every method
  std::vector<Method> methods;
};

struct GroupSummary {
  /// (key name, value) pairs in group_by order
  std::vector<std::pair<std::string, std::string>> group;
  Method method = Method::artc;
  Metric metric = Metric::type_i;
  double mean = 0.0;
  /// sample sd across designs; 0 for a single design
  double sd = 0.0;
  int designs = 0;
};

/// Two-stage aggregation: per-design proportions, then mean and sd across the
/// designs of each group. Throws InsufficientDataError on empty input.
std::vector<GroupSummary> summarize(std::span<const TrialRecord> records, std::span<const GroupKey> group_by,
                                    const SummaryFilter& filter = {});
std::vector<GroupSummary> summarize(std::span<const MetricsRow> rows, std::span<const GroupKey> group_by,
                                    const SummaryFilter& filter = {});

/// Per-design CSV: layout,distribution,n,design_kind,contrast_size,method,value,trials
void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows, Metric metric);
void write_summary_csv(const std::string& path, std::span<const GroupSummary> rows, std::span<const GroupKey> group_by);

/// Writes type_i_all_designs.csv, power_all_designs.csv, the grouped summary
/// tables and dropped_datasets.csv into `directory`.
void write_validation_outputs(const std::string& directory, std::span<const SimDesign> grid, const GridResult& result);
void write_validation_outputs(const std::string& directory, std::span<const SimDesign> grid,
                              std::span<const MetricsRow> rows, std::span<const int> dropped,
                              std::span<const int> analyzed);

/// Sample excess kurtosis m4 / m2^2 - 3 (moment estimator).
template <typename Derived>
double excess_kurtosis(const Eigen::DenseBase<Derived>& values) {
  const auto n = static_cast<double>(values.size());
  const auto centered = (values.derived().array() - values.derived().mean()).eval();
  const double m2 = centered.square().sum() / n;
  const double m4 = centered.square().square().sum() / n;
  return m4 / (m2 * m2) - 3.0;
}

/// Excess kurtosis above this marks aligned residuals as fat-tailed.
inline constexpr double fat_tail_kurtosis_threshold = 10.0;

struct ResidualDiagnostic {
  std::vector<std::string> target_factors;
  Eigen::Index n = 0;
  double excess_kurtosis = 0.0;
  bool fat_tails = false;
  std::string advice;
};

/// Excess kurtosis of the ART-C aligned responses Y' for the contrast family.
/// Throws InsufficientDataError for n < 4 and DegenerateVarianceError when Y'
/// is constant.
ResidualDiagnostic diagnose_residuals(const Dataset& data, const ContrastSpec& spec);

}  // namespace artc
