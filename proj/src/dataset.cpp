#include "artc/dataset.hpp"

#include "artc/csv.hpp"
#include "artc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

namespace artc {

int FactorSpec::find_level(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == label) return static_cast<int>(i);
  return -1;
}

std::string to_string(DesignKind kind) { return kind == DesignKind::between ? "between" : "within"; }

std::string to_string(AdjustMethod method) {
  switch (method) {
    case AdjustMethod::holm: return "holm";
    case AdjustMethod::bonferroni: return "bonferroni";
    case AdjustMethod::none: return "none";
  }
  return "none";
}

DesignKind parse_design_kind(std::string_view text) {
  if (text == "between") return DesignKind::between;
  if (text == "within") return DesignKind::within;
  throw InvalidArgumentError("unknown design kind '" + std::string(text) + "' (expected between or within)");
}

AdjustMethod parse_adjust_method(std::string_view text) {
  if (text == "holm") return AdjustMethod::holm;
  if (text == "bonferroni") return AdjustMethod::bonferroni;
  if (text == "none") return AdjustMethod::none;
  throw InvalidArgumentError("unknown adjustment method '" + std::string(text) + "' (expected holm, bonferroni or none)");
}

int Dataset::factor_position(std::string_view name) const {
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].name == name) return static_cast<int>(i);
  throw UnknownFactorError("unknown factor '" + std::string(name) + "'");
}

std::vector<int> Dataset::factor_positions(std::span<const std::string> names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(factor_position(name));
  return out;
}

Condition Dataset::condition_of(Eigen::Index row) const {
  Condition c(factors.size());
  for (int j = 0; j < factor_count(); ++j) c[j] = levels(row, j);
  return c;
}

std::string Dataset::condition_label(const Condition& condition) const {
  std::string label;
  for (std::size_t j = 0; j < condition.size(); ++j) {
    if (j) label += ',';
    label += factors[j].levels[condition[j]];
  }
  return label;
}

std::int64_t Dataset::full_cell_count() const {
  std::int64_t cells = 1;
  for (const auto& f : factors) cells *= f.level_count();
  return cells;
}

Dataset make_dataset(std::vector<FactorSpec> factors, Eigen::MatrixXi levels, Eigen::VectorXd response,
                     std::optional<std::string> subject_name, std::vector<std::string> subject_labels,
                     Eigen::VectorXi subject, std::string response_name) {
  if (factors.empty()) throw SchemaError("dataset needs at least one factor");
  if (response.size() == 0) throw SchemaError("dataset has no rows");
  if (levels.rows() != response.size() || levels.cols() != static_cast<Eigen::Index>(factors.size()))
    throw SchemaError("level matrix shape does not match rows x factors");

  std::set<std::string> names;
  for (const auto& f : factors) {
    if (!names.insert(f.name).second) throw SchemaError("duplicate factor name '" + f.name + "'");
    std::set<std::string> unique(f.levels.begin(), f.levels.end());
    if (unique.size() != f.levels.size()) throw SchemaError("factor '" + f.name + "' has duplicate level labels");
    if (f.levels.empty()) throw SchemaError("factor '" + f.name + "' has no levels");
  }
  for (Eigen::Index i = 0; i < levels.rows(); ++i) {
    if (!std::isfinite(response[i])) throw ParseError("non-finite response at row " + std::to_string(i + 1), i + 1);
    for (Eigen::Index j = 0; j < levels.cols(); ++j)
      if (levels(i, j) < 0 || levels(i, j) >= factors[j].level_count())
        throw SchemaError("level index out of range at row " + std::to_string(i + 1));
  }

  Dataset data;
  data.factors = std::move(factors);
  data.levels = std::move(levels);
  data.response = std::move(response);
  data.response_name = std::move(response_name);
  if (subject_name) {
    if (subject.size() != data.response.size()) throw SchemaError("subject column length does not match rows");
    for (Eigen::Index i = 0; i < subject.size(); ++i)
      if (subject[i] < 0 || subject[i] >= static_cast<int>(subject_labels.size()))
        throw SchemaError("subject index out of range at row " + std::to_string(i + 1));
    data.subject_name = std::move(subject_name);
    data.subject_labels = std::move(subject_labels);
    data.subject = std::move(subject);

    std::set<std::pair<int, Condition>> seen;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (!seen.emplace(data.subject[i], data.condition_of(i)).second)
        throw DuplicateObservationError("subject '" + data.subject_labels[data.subject[i]] +
                                        "' has more than one observation in condition " +
                                        data.condition_label(data.condition_of(i)) + " (row " + std::to_string(i + 1) +
                                        ")");
    }
  }
  return data;
}

namespace {

int column_of(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

double parse_response(const std::string& text, std::size_t row) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last)
    throw ParseError("row " + std::to_string(row) + ": response '" + text + "' is not a number", row);
  if (!std::isfinite(value)) throw ParseError("row " + std::to_string(row) + ": response is not finite", row);
  return value;
}

// Interns labels in first-appearance order.
struct LabelIndex {
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;

  int intern(const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  }
};

}  // namespace

Dataset load_csv(std::istream& in, const ColumnSchema& schema) {
  if (schema.response.empty()) throw SchemaError("no response column given");
  if (schema.factors.empty()) throw SchemaError("at least one factor column is required");

  const csv::Table table = csv::read(in);
  const int response_col = column_of(table.header, schema.response);
  std::vector<int> factor_cols;
  for (const auto& f : schema.factors) factor_cols.push_back(column_of(table.header, f));
  const int subject_col = schema.subject ? column_of(table.header, *schema.subject) : -1;
  if (table.rows.empty()) throw SchemaError("CSV has a header but no data rows");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  std::vector<LabelIndex> level_index(factor_cols.size());
  LabelIndex subjects;
  Eigen::MatrixXi levels(n, static_cast<Eigen::Index>(factor_cols.size()));
  Eigen::VectorXd response(n);
  Eigen::VectorXi subject(subject_col >= 0 ? n : 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const auto row_no = static_cast<std::size_t>(i + 1);
    response[i] = parse_response(row[response_col], row_no);
    for (std::size_t j = 0; j < factor_cols.size(); ++j) {
      const auto& label = row[factor_cols[j]];
      if (label.empty()) throw ParseError("row " + std::to_string(row_no) + ": empty level for factor '" +
                                              schema.factors[j] + "'",
                                          row_no);
      levels(i, static_cast<Eigen::Index>(j)) = level_index[j].intern(label);
    }
    if (subject_col >= 0) subject[i] = subjects.intern(row[subject_col]);
  }

  std::vector<FactorSpec> factors;
  for (std::size_t j = 0; j < factor_cols.size(); ++j)
    factors.push_back({schema.factors[j], std::move(level_index[j].labels)});

  return make_dataset(std::move(factors), std::move(levels), std::move(response), schema.subject,
                      std::move(subjects.labels), std::move(subject), schema.response);
}

Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return load_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> fields;
  if (data.has_subject()) fields.push_back(*data.subject_name);
  for (const auto& f : data.factors) fields.push_back(f.name);
  fields.push_back(data.response_name);
  csv::write_row(out, fields);

  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    fields.clear();
    if (data.has_subject()) fields.push_back(data.subject_labels[data.subject[i]]);
    for (int j = 0; j < data.factor_count(); ++j) fields.push_back(data.factors[j].levels[data.levels(i, j)]);
    fields.push_back(csv::format_double(data.response[i]));
    csv::write_row(out, fields);
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  write_csv(out, data);
}

std::map<Condition, std::vector<Eigen::Index>> group_index(const Dataset& data, std::span<const int> positions) {
  std::map<Condition, std::vector<Eigen::Index>> groups;
  Condition key(positions.size());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (std::size_t k = 0; k < positions.size(); ++k) key[k] = data.levels(i, positions[k]);
    groups[key].push_back(i);
  }
  return groups;
}

std::map<Condition, std::vector<Eigen::Index>> condition_index(const Dataset& data) {
  std::vector<int> all(data.factors.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return group_index(data, all);
}

void require_complete_cells(const Dataset& data) {
  for (const auto& f : data.factors)
    if (f.level_count() < 2) throw SchemaError("factor '" + f.name + "' needs at least 2 levels for analysis");
  const auto cells = condition_index(data);
  if (static_cast<std::int64_t>(cells.size()) == data.full_cell_count()) return;

  Condition c(data.factors.size(), 0);
  for (;;) {
    if (!cells.contains(c)) throw EmptyCellError("no observations in cell " + data.condition_label(c));
    int j = data.factor_count() - 1;
    while (j >= 0 && ++c[j] == data.factors[j].level_count()) c[j--] = 0;
    if (j < 0) break;
  }
}

void validate(const ContrastSpec& spec, const Dataset& data) {
  if (spec.target_factors.empty()) throw InvalidArgumentError("contrast needs at least one target factor");
  std::set<std::string> seen;
  for (const auto& name : spec.target_factors) {
    data.factor_position(name);
    if (!seen.insert(name).second) throw InvalidArgumentError("target factor '" + name + "' listed twice");
  }
}

}  // namespace artc
