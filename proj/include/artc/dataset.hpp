#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace artc {

struct FactorSpec {
  std::string name;
  std::vector<std::string> levels;

  int level_count() const { return static_cast<int>(levels.size()); }
  /// Index of `label`, or -1.
  int find_level(std::string_view label) const;
};

enum class DesignKind { between, within };

enum class AdjustMethod { holm, bonferroni, none };

std::string to_string(DesignKind kind);
std::string to_string(AdjustMethod method);
DesignKind parse_design_kind(std::string_view text);
AdjustMethod parse_adjust_method(std::string_view text);

/// One level index per factor, in dataset factor order.
using Condition = std::vector<int>;

/// Long-format observations. Immutable once constructed through make_dataset or load_csv.
struct Dataset {
  std::vector<FactorSpec> factors;
  /// rows x factors, entries index into factors[j].levels
  Eigen::MatrixXi levels;
  Eigen::VectorXd response;
  std::string response_name = "Y";

  std::optional<std::string> subject_name;
  std::vector<std::string> subject_labels;
  /// Per-row index into subject_labels; empty when there is no subject column.
  Eigen::VectorXi subject;

  Eigen::Index rows() const { return response.size(); }
  int factor_count() const { return static_cast<int>(factors.size()); }
  bool has_subject() const { return subject_name.has_value(); }
  int subject_count() const { return static_cast<int>(subject_labels.size()); }

  /// Position of the named factor; throws UnknownFactorError.
  int factor_position(std::string_view name) const;
  std::vector<int> factor_positions(std::span<const std::string> names) const;

  Condition condition_of(Eigen::Index row) const;
  /// "A1,B2,C1" style label built from the level labels of `condition`.
  std::string condition_label(const Condition& condition) const;
  /// Product of level counts over all factors.
  std::int64_t full_cell_count() const;
};

/// Validates invariants: unique factor names, unique level labels,
/// finite responses, and at most one row per (subject, condition).
Dataset make_dataset(std::vector<FactorSpec> factors, Eigen::MatrixXi levels, Eigen::VectorXd response,
                     std::optional<std::string> subject_name = std::nullopt,
                     std::vector<std::string> subject_labels = {}, Eigen::VectorXi subject = {},
                     std::string response_name = "Y");

/// Maps CSV columns onto dataset roles.
struct ColumnSchema {
  std::string response;
  std::vector<std::string> factors;
  std::optional<std::string> subject;
};

/// Factor levels and subjects are ordered by first appearance.
Dataset load_csv(std::istream& in, const ColumnSchema& schema);
Dataset load_csv(const std::string& path, const ColumnSchema& schema);

/// Columns: subject (if any), factors in order, response.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

/// Rows bucketed by condition; conditions without rows are absent.
std::map<Condition, std::vector<Eigen::Index>> condition_index(const Dataset& data);

/// Rows bucketed by the levels of a subset of factors (positions into data.factors).
std::map<Condition, std::vector<Eigen::Index>> group_index(const Dataset& data, std::span<const int> positions);

/// Every analysis entry point calls this. Throws SchemaError for a factor with
/// fewer than 2 levels and EmptyCellError naming the first combination of
/// levels (over all factors) that has no rows.
void require_complete_cells(const Dataset& data);

/// Factors of interest for a contrast family, with the p-value adjustment.
struct ContrastSpec {
  std::vector<std::string> target_factors;
  AdjustMethod adjust = AdjustMethod::holm;
};

/// Throws UnknownFactorError / InvalidArgumentError if `spec` does not fit the dataset.
void validate(const ContrastSpec& spec, const Dataset& data);

}  // namespace artc
