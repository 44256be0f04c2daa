#include "artc/harness.hpp"

#include "artc/classic_tests.hpp"
#include "artc/csv.hpp"
#include "artc/errors.hpp"
#include "artc/rank_align.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace artc {

std::string to_string(Method method) {
  switch (method) {
    case Method::artc: return "artc";
    case Method::art: return "art";
    case Method::t_test: return "t_test";
    case Method::rank_test: return "rank_test";
  }
  return "?";
}

std::string to_string(Metric metric) { return metric == Metric::type_i ? "type_i" : "power"; }

std::string to_string(GroupKey key) {
  switch (key) {
    case GroupKey::layout: return "layout";
    case GroupKey::distribution: return "distribution";
    case GroupKey::n: return "n";
    case GroupKey::design_kind: return "design_kind";
    case GroupKey::contrast_size: return "contrast_size";
  }
  return "?";
}

namespace {

struct PairSamples {
  std::vector<double> x;
  std::vector<double> y;
};

/// Raw responses of two concatenated levels. Within-subjects: one mean per
/// subject over the remaining factors, aligned by subject.
PairSamples pair_samples(const Dataset& joined, int level1, int level2, bool within) {
  PairSamples out;
  if (!within) {
    for (Eigen::Index i = 0; i < joined.rows(); ++i) {
      const int level = joined.levels(i, 0);
      if (level == level1) out.x.push_back(joined.response[i]);
      if (level == level2) out.y.push_back(joined.response[i]);
    }
    return out;
  }
  const auto subjects = static_cast<std::size_t>(joined.subject_count());
  std::vector<double> sx(subjects, 0.0), sy(subjects, 0.0);
  std::vector<int> nx(subjects, 0), ny(subjects, 0);
  for (Eigen::Index i = 0; i < joined.rows(); ++i) {
    const int level = joined.levels(i, 0);
    const auto s = static_cast<std::size_t>(joined.subject[i]);
    if (level == level1) sx[s] += joined.response[i], ++nx[s];
    if (level == level2) sy[s] += joined.response[i], ++ny[s];
  }
  for (std::size_t s = 0; s < subjects; ++s) {
    if (nx[s] == 0 || ny[s] == 0) continue;
    out.x.push_back(sx[s] / nx[s]);
    out.y.push_back(sy[s] / ny[s]);
  }
  return out;
}

double classic_p(Method method, const PairSamples& samples, bool within) {
  try {
    if (method == Method::t_test) return t_test(samples.x, samples.y, within).p;
    return within ? wilcoxon_signed_rank(samples.x, samples.y).p : mann_whitney_u(samples.x, samples.y).p;
  } catch (const DegenerateVarianceError&) {
    return 1.0;
  }
}

}  // namespace

std::optional<std::vector<TrialRecord>> run_replication(const SimDesign& design, std::uint64_t seed,
                                                        std::uint64_t replication, const HarnessOptions& options) {
  const Dataset data = gen_dataset(design, seed, replication).first;
  const bool within = design.kind == DesignKind::within;
  const std::vector<int> counts = level_counts(design.layout);

  std::vector<TrialRecord> records;
  for (const ContrastFamily& family : enumerate_contrast_families(counts)) {
    ContrastSpec spec;
    spec.adjust = AdjustMethod::none;
    for (int j : family.factors) spec.target_factors.push_back(data.factors[j].name);

    std::vector<ContrastResult> artc_results, art_results;
    try {
      artc_results = pairwise_contrasts(data, spec, design.kind, AlignmentKind::artc, options.fit);
      art_results = pairwise_contrasts(data, spec, design.kind, AlignmentKind::art, options.fit);
    } catch (const NonConvergenceError&) {
      return std::nullopt;
    }

    TrialRecord base;
    base.design = design;
    base.replication = replication;
    base.contrast_size = static_cast<int>(family.factors.size());
    for (std::size_t k = 0; k < spec.target_factors.size(); ++k) {
      if (k) base.family += ':';
      base.family += spec.target_factors[k];
    }
    auto emit = [&](Method method, const std::string& pair, double p) {
      TrialRecord r = base;
      r.method = method;
      r.pair = pair;
      r.p = p;
      r.rejected = p < options.alpha;
      records.push_back(std::move(r));
    };

    for (const auto& c : artc_results) emit(Method::artc, c.contrast, c.p);
    for (const auto& c : art_results) emit(Method::art, c.contrast, c.p);

    const Dataset joined = concat_factors(data, spec.target_factors);
    std::vector<PairSamples> samples;
    for (const auto& c : artc_results) samples.push_back(pair_samples(joined, c.level1, c.level2, within));
    for (Method method : {Method::t_test, Method::rank_test})
      for (std::size_t k = 0; k < artc_results.size(); ++k)
        emit(method, artc_results[k].contrast, classic_p(method, samples[k], within));
  }
  return records;
}

GridResult run_grid(std::span<const SimDesign> grid, const HarnessOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgumentError("alpha must lie in (0, 1)");
  if (options.replications < 1) throw InvalidArgumentError("replications must be at least 1");
  if (options.workers < 1) throw InvalidArgumentError("workers must be at least 1");

  const auto reps = static_cast<std::size_t>(options.replications);
  const std::size_t tasks = grid.size() * reps;
  std::vector<std::optional<std::vector<TrialRecord>>> slots(tasks);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      try {
        slots[t] = run_replication(grid[t / reps], options.seed, t % reps, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.workers), std::max<std::size_t>(tasks, 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  GridResult result;
  result.dropped.assign(grid.size(), 0);
  result.analyzed.assign(grid.size(), 0);
  for (std::size_t t = 0; t < tasks; ++t) {
    if (!slots[t]) {
      ++result.dropped[t / reps];
      continue;
    }
    ++result.analyzed[t / reps];
    auto& recs = *slots[t];
    result.records.insert(result.records.end(), std::make_move_iterator(recs.begin()),
                          std::make_move_iterator(recs.end()));
    recs.clear();
    recs.shrink_to_fit();
  }
  return result;
}

std::vector<SimDesign> full_grid() {
  std::vector<SimDesign> grid;
  for (bool null_true : {true, false})
    for (Layout layout : all_layouts)
      for (Distribution distribution : all_distributions)
        for (int n : all_sample_sizes)
          for (DesignKind kind : {DesignKind::between, DesignKind::within})
            grid.push_back({layout, distribution, n, kind, null_true});
  return grid;
}

std::vector<SimDesign> smoke_grid() {
  std::vector<SimDesign> grid;
  for (bool null_true : {true, false})
    for (DesignKind kind : {DesignKind::between, DesignKind::within})
      grid.push_back({Layout::l2x2, Distribution::normal, 8, kind, null_true});
  return grid;
}

std::vector<MetricsRow> per_design_metrics(std::span<const TrialRecord> records) {
  std::map<std::tuple<SimDesign, int, Method>, MetricsRow> cells;
  for (const TrialRecord& r : records) {
    auto [it, inserted] = cells.try_emplace({r.design, r.contrast_size, r.method});
    MetricsRow& row = it->second;
    if (inserted) {
      row.design = r.design;
      row.contrast_size = r.contrast_size;
      row.method = r.method;
      row.metric = r.metric();
    }
    ++row.trials;
    if (r.rejected) ++row.rejections;
  }
  std::vector<MetricsRow> rows;
  rows.reserve(cells.size());
  for (auto& [key, row] : cells) {
    row.value = static_cast<double>(row.rejections) / static_cast<double>(row.trials);
    rows.push_back(row);
  }
  return rows;
}

std::vector<MetricsRow> run_validation(std::span<const SimDesign> grid, const HarnessOptions& options,
                                       std::vector<int>* dropped, std::vector<int>* analyzed) {
  std::vector<MetricsRow> rows;
  if (dropped) dropped->clear();
  if (analyzed) analyzed->clear();
  for (const SimDesign& design : grid) {
    const GridResult cell = run_grid(std::span(&design, 1), options);
    const auto metrics = per_design_metrics(cell.records);
    rows.insert(rows.end(), metrics.begin(), metrics.end());
    if (dropped) dropped->push_back(cell.dropped.front());
    if (analyzed) analyzed->push_back(cell.analyzed.front());
  }
  return rows;
}

namespace {

int key_value(GroupKey key, const MetricsRow& row) {
  switch (key) {
    case GroupKey::layout: return static_cast<int>(row.design.layout);
    case GroupKey::distribution: return static_cast<int>(row.design.distribution);
    case GroupKey::n: return row.design.n_per_condition;
    case GroupKey::design_kind: return static_cast<int>(row.design.kind);
    case GroupKey::contrast_size: return row.contrast_size;
  }
  return 0;
}

std::string key_label(GroupKey key, const MetricsRow& row) {
  switch (key) {
    case GroupKey::layout: return to_string(row.design.layout);
    case GroupKey::distribution: return to_string(row.design.distribution);
    case GroupKey::n: return std::to_string(row.design.n_per_condition);
    case GroupKey::design_kind: return to_string(row.design.kind);
    case GroupKey::contrast_size: return std::to_string(row.contrast_size);
  }
  return {};
}

}  // namespace

std::vector<GroupSummary> summarize(std::span<const MetricsRow> rows, std::span<const GroupKey> group_by,
                                    const SummaryFilter& filter) {
  if (rows.empty()) throw InsufficientDataError("nothing to summarize");

  struct Accumulator {
    GroupSummary summary;
    std::vector<double> values;
  };
  // Key: metric, group values in group_by order, method.
  std::map<std::tuple<int, std::vector<int>, int>, Accumulator> groups;
  for (const MetricsRow& row : rows) {
    if (filter.metric && row.metric != *filter.metric) continue;
    if (filter.exclude_cauchy && row.design.distribution == Distribution::cauchy) continue;
    if (!filter.methods.empty() &&
        std::find(filter.methods.begin(), filter.methods.end(), row.method) == filter.methods.end())
      continue;
    std::vector<int> key;
    for (GroupKey g : group_by) key.push_back(key_value(g, row));
    auto [it, inserted] =
        groups.try_emplace({static_cast<int>(row.metric), std::move(key), static_cast<int>(row.method)});
    Accumulator& acc = it->second;
    if (inserted) {
      for (GroupKey g : group_by) acc.summary.group.emplace_back(to_string(g), key_label(g, row));
      acc.summary.method = row.method;
      acc.summary.metric = row.metric;
    }
    acc.values.push_back(row.value);
  }

  std::vector<GroupSummary> out;
  for (auto& [key, acc] : groups) {
    const Eigen::Map<const Eigen::VectorXd> v(acc.values.data(), static_cast<Eigen::Index>(acc.values.size()));
    GroupSummary s = std::move(acc.summary);
    s.designs = static_cast<int>(v.size());
    s.mean = v.mean();
    s.sd = v.size() > 1 ? std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(v.size() - 1)) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<GroupSummary> summarize(std::span<const TrialRecord> records, std::span<const GroupKey> group_by,
                                    const SummaryFilter& filter) {
  if (records.empty()) throw InsufficientDataError("nothing to summarize");
  const auto rows = per_design_metrics(records);
  return summarize(std::span<const MetricsRow>(rows), group_by, filter);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows, Metric metric) {
  auto out = open_output(path);
  csv::write_row(out, {"layout", "distribution", "n", "design_kind", "contrast_size", "method", "value", "trials"});
  for (const MetricsRow& r : rows) {
    if (r.metric != metric) continue;
    csv::write_row(out, {to_string(r.design.layout), to_string(r.design.distribution),
                         std::to_string(r.design.n_per_condition), to_string(r.design.kind),
                         std::to_string(r.contrast_size), to_string(r.method), csv::format_double(r.value),
                         std::to_string(r.trials)});
  }
}

void write_summary_csv(const std::string& path, std::span<const GroupSummary> rows, std::span<const GroupKey> group_by) {
  auto out = open_output(path);
  std::vector<std::string> header;
  for (GroupKey g : group_by) header.push_back(to_string(g));
  for (const char* name : {"method", "metric", "mean", "sd", "designs"}) header.emplace_back(name);
  csv::write_row(out, header);
  for (const GroupSummary& s : rows) {
    std::vector<std::string> fields;
    for (const auto& [name, value] : s.group) fields.push_back(value);
    fields.push_back(to_string(s.method));
    fields.push_back(to_string(s.metric));
    fields.push_back(csv::format_double(s.mean));
    fields.push_back(csv::format_double(s.sd));
    fields.push_back(std::to_string(s.designs));
    csv::write_row(out, fields);
  }
}

void write_validation_outputs(const std::string& directory, std::span<const SimDesign> grid,
                              std::span<const MetricsRow> rows, std::span<const int> dropped,
                              std::span<const int> analyzed) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto path = [&](const char* name) { return (fs::path(directory) / name).string(); };

  write_metrics_csv(path("type_i_all_designs.csv"), rows, Metric::type_i);
  write_metrics_csv(path("power_all_designs.csv"), rows, Metric::power);

  struct Table {
    const char* file;
    std::vector<GroupKey> keys;
    SummaryFilter filter;
  };
  const Table tables[] = {
      {"type_i_by_contrast_size_layout.csv",
       {GroupKey::contrast_size, GroupKey::layout},
       {Metric::type_i, true, {Method::artc, Method::t_test}}},
      {"power_by_distribution.csv",
       {GroupKey::distribution},
       {Metric::power, false, {Method::artc, Method::t_test, Method::rank_test, Method::art}}},
      {"type_i_by_distribution_art.csv", {GroupKey::distribution}, {Metric::type_i, false, {Method::artc, Method::art}}},
      {"power_by_contrast_size_art.csv", {GroupKey::contrast_size}, {Metric::power, false, {Method::artc, Method::art}}},
  };
  for (const Table& t : tables) {
    const auto summary = rows.empty() ? std::vector<GroupSummary>{} : summarize(rows, t.keys, t.filter);
    write_summary_csv(path(t.file), summary, t.keys);
  }

  auto out = open_output(path("dropped_datasets.csv"));
  csv::write_row(out, {"layout", "distribution", "n", "design_kind", "null_true", "analyzed", "dropped"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SimDesign& d = grid[i];
    csv::write_row(out, {to_string(d.layout), to_string(d.distribution), std::to_string(d.n_per_condition),
                         to_string(d.kind), d.null_true ? "true" : "false", std::to_string(analyzed[i]),
                         std::to_string(dropped[i])});
  }
}

void write_validation_outputs(const std::string& directory, std::span<const SimDesign> grid, const GridResult& result) {
  const auto rows = per_design_metrics(result.records);
  write_validation_outputs(directory, grid, rows, result.dropped, result.analyzed);
}

}  // namespace artc
