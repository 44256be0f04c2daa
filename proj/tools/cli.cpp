#include "cli.hpp"

#include "artc/csv.hpp"
#include "artc/errors.hpp"
#include "artc/harness.hpp"
#include "artc/inference.hpp"
#include "artc/rank_align.hpp"
#include "artc/simgen.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace artc::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* version = "0.1.0";
constexpr std::uint64_t default_seed = 20210508;

struct Schema {
  std::string input;
  std::string response;
  std::vector<std::string> factors;
  std::string subject;

  ColumnSchema columns() const {
    ColumnSchema s{response, factors, std::nullopt};
    if (!subject.empty()) s.subject = subject;
    return s;
  }
};

void add_schema(CLI::App* cmd, Schema& schema) {
  cmd->add_option("--input,-i", schema.input, "input CSV (long format, one row per observation)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--response", schema.response, "response column")->required();
  cmd->add_option("--factors", schema.factors, "factor columns")->required()->delimiter(',');
  cmd->add_option("--subject", schema.subject, "subject column (required for within-subjects designs)");
}

std::ofstream open_file(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot write '" + path + "'");
  return out;
}

void write_text(const std::string& path, const std::string& text) { open_file(path) << text; }

/// version, subcommand and the effective value of every option
void write_manifest(const std::string& path, const CLI::App& cmd) {
  std::string text = "version = \"" + std::string(version) + "\"\nsubcommand = \"" + cmd.get_name() + "\"\n";
  text += cmd.config_to_str(true, false);
  write_text(path, text);
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string sanitize(std::string id) {
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

struct AlignConfig {
  Schema schema;
  std::vector<std::string> target;
  std::string alignment = "artc";
  std::string output;
};

void cmd_align(const AlignConfig& cfg, const CLI::App& cmd) {
  const Dataset data = load_csv(cfg.schema.input, cfg.schema.columns());
  const AlignedColumns aligned = cfg.alignment == "art" ? align_art_effect(data, cfg.target)
                                                         : align_artc(data, cfg.target);
  const csv::Table raw = csv::read_file(cfg.schema.input);

  auto out = open_file(cfg.output);
  std::vector<std::string> header = raw.header;
  for (const char* name : {"target", "Y_prime", "Y_double_prime"}) header.emplace_back(name);
  csv::write_row(out, header);
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<std::string> fields = raw.rows[r];
    const auto i = static_cast<Eigen::Index>(r);
    fields.push_back(aligned.target());
    fields.push_back(csv::format_double(aligned.y_prime[i]));
    fields.push_back(csv::format_double(aligned.y_double_prime[i]));
    csv::write_row(out, fields);
  }
  write_manifest(cfg.output + ".manifest.txt", cmd);
}

struct AnalyzeConfig {
  Schema schema;
  std::vector<std::string> target;
  std::string design;
  std::string adjust = "holm";
  std::string alignment = "artc";
  std::string output;
};

void cmd_analyze(const AnalyzeConfig& cfg, const CLI::App& cmd) {
  const Dataset data = load_csv(cfg.schema.input, cfg.schema.columns());
  const DesignKind kind = parse_design_kind(cfg.design);
  ContrastSpec spec{cfg.target, parse_adjust_method(cfg.adjust)};
  validate(spec, data);

  std::vector<AnovaRow> anova;
  std::vector<ContrastResult> contrasts;
  try {
    anova = anova_on_art(data, kind);
    contrasts = pairwise_contrasts(data, spec, kind,
                                   cfg.alignment == "art" ? AlignmentKind::art : AlignmentKind::artc);
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(std::string("the dataset could not be fit: ") + e.what());
  }

  fs::create_directories(cfg.output);
  auto a = open_file((fs::path(cfg.output) / "anova.csv").string());
  csv::write_row(a, {"effect", "F", "df_num", "df_den", "p"});
  for (const AnovaRow& r : anova)
    csv::write_row(a, {r.label(), csv::format_double(r.F), csv::format_double(r.df_num),
                       csv::format_double(r.df_den), csv::format_double(r.p)});

  const std::string method = cfg.alignment == "art" ? "art" : "artc";
  auto c = open_file((fs::path(cfg.output) / "contrasts.csv").string());
  csv::write_row(c, {"contrast", "estimate", "SE", "df", "t.ratio", "p.value", "p_adj", "method"});
  for (const ContrastResult& r : contrasts)
    csv::write_row(c, {r.contrast, csv::format_double(r.estimate), csv::format_double(r.se),
                       csv::format_double(r.df), csv::format_double(r.t_ratio), csv::format_double(r.p),
                       csv::format_double(r.p_adj), method});
  write_manifest((fs::path(cfg.output) / "manifest.txt").string(), cmd);
}

struct SimulateConfig {
  std::string scenario = "grid";
  std::string layout = "2x2";
  std::string distribution = "normal";
  int n = 8;
  std::string design = "between";
  bool alternative = false;
  int replications = 1;
  std::uint64_t seed = default_seed;
  double log_sd = 0.02;
  std::string output;
};

void cmd_simulate(const SimulateConfig& cfg, const CLI::App& cmd) {
  fs::create_directories(cfg.output);
  auto emit = [&](const std::string& stem, const std::pair<Dataset, GenRecipe>& generated) {
    write_csv((fs::path(cfg.output) / (stem + ".csv")).string(), generated.first);
    write_text((fs::path(cfg.output) / (stem + ".recipe.json")).string(), recipe_json(generated.second));
  };
  if (cfg.scenario == "running-example") {
    for (int r = 0; r < cfg.replications; ++r) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      emit("running_example_seed" + std::to_string(seed), gen_running_example(seed, cfg.log_sd));
    }
  } else {
    const SimDesign design{parse_layout(cfg.layout), parse_distribution(cfg.distribution), cfg.n,
                           parse_design_kind(cfg.design), !cfg.alternative};
    for (int r = 0; r < cfg.replications; ++r)
      emit(sanitize(design.id()) + "_rep" + std::to_string(r),
           gen_dataset(design, cfg.seed, static_cast<std::uint64_t>(r)));
  }
  write_manifest((fs::path(cfg.output) / "manifest.txt").string(), cmd);
}

struct ValidateConfig {
  std::string grid = "smoke";
  std::vector<std::string> layouts;
  std::vector<std::string> distributions;
  std::vector<int> sizes;
  std::vector<std::string> designs;
  std::string hypothesis = "both";
  int replications = 50;
  double alpha = 0.05;
  std::uint64_t seed = default_seed;
  int workers = 1;
  std::string output;
};

void cmd_validate(const ValidateConfig& cfg, const CLI::App& cmd, std::ostream& err) {
  std::vector<SimDesign> grid;
  for (const SimDesign& d : cfg.grid == "full" ? full_grid() : smoke_grid()) {
    auto listed = [](const std::vector<std::string>& filter, const std::string& value) {
      return filter.empty() || std::find(filter.begin(), filter.end(), value) != filter.end();
    };
    if (!listed(cfg.layouts, to_string(d.layout))) continue;
    if (!listed(cfg.distributions, to_string(d.distribution))) continue;
    if (!listed(cfg.designs, to_string(d.kind))) continue;
    if (!cfg.sizes.empty() && std::find(cfg.sizes.begin(), cfg.sizes.end(), d.n_per_condition) == cfg.sizes.end())
      continue;
    if (cfg.hypothesis == "null" && !d.null_true) continue;
    if (cfg.hypothesis == "alternative" && d.null_true) continue;
    grid.push_back(d);
  }
  if (grid.empty()) throw InvalidArgumentError("the filters select no grid cells");

  HarnessOptions options;
  options.replications = cfg.replications;
  options.alpha = cfg.alpha;
  options.seed = cfg.seed;
  options.workers = cfg.workers;

  std::vector<int> dropped, analyzed;
  const auto rows = run_validation(grid, options, &dropped, &analyzed);
  int total_dropped = 0;
  for (int d : dropped) total_dropped += d;
  if (total_dropped > 0)
    err << "note: " << total_dropped << " dataset(s) dropped after a model failed to converge\n";
  write_validation_outputs(cfg.output, grid, rows, dropped, analyzed);
  write_manifest((fs::path(cfg.output) / "manifest.txt").string(), cmd);
}

struct DiagnoseConfig {
  Schema schema;
  std::vector<std::string> target;
  std::string output;
};

void cmd_diagnose(const DiagnoseConfig& cfg, const CLI::App& cmd, std::ostream& err) {
  const Dataset data = load_csv(cfg.schema.input, cfg.schema.columns());
  const ResidualDiagnostic d = diagnose_residuals(data, ContrastSpec{cfg.target, AdjustMethod::none});

  auto out = open_file(cfg.output);
  csv::write_row(out, {"target", "n", "excess_kurtosis", "fat_tails", "advice"});
  csv::write_row(out, {join(d.target_factors, ':'), std::to_string(d.n), csv::format_double(d.excess_kurtosis),
                       d.fat_tails ? "true" : "false", d.advice});
  if (d.fat_tails) err << "warning: " << d.advice << "\n";
  write_manifest(cfg.output + ".manifest.txt", cmd);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aligned rank transform (ART) and ART-C contrasts", "artc"};
  app.set_version_flag("--version", version);
  app.set_config("--config", "", "key = value config file; command-line flags take precedence");
  app.require_subcommand(1);

  const auto kinds = CLI::IsMember({"between", "within"});
  const auto alignments = CLI::IsMember({"artc", "art"});

  AlignConfig align;
  auto* align_cmd = app.add_subcommand("align", "write aligned (Y_prime) and aligned-and-ranked (Y_double_prime) responses");
  add_schema(align_cmd, align.schema);
  align_cmd->add_option("--target", align.target, "target factors (contrast family or ART effect)")
      ->required()
      ->delimiter(',');
  align_cmd->add_option("--alignment", align.alignment, "artc, or art for the classic per-effect alignment")
      ->check(alignments)
      ->capture_default_str();
  align_cmd->add_option("--output,-o", align.output, "output CSV")->required();

  AnalyzeConfig analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "omnibus ANOVA on aligned ranks plus pairwise contrasts");
  add_schema(analyze_cmd, analyze.schema);
  analyze_cmd->add_option("--target", analyze.target, "factors whose level combinations are compared")
      ->required()
      ->delimiter(',');
  analyze_cmd->add_option("--design", analyze.design, "between or within")->required()->check(kinds);
  analyze_cmd->add_option("--adjust", analyze.adjust, "p-value adjustment")
      ->check(CLI::IsMember({"holm", "bonferroni", "none"}))
      ->capture_default_str();
  analyze_cmd->add_option("--alignment", analyze.alignment, "contrast alignment: artc, or art (not recommended)")
      ->check(alignments)
      ->capture_default_str();
  analyze_cmd->add_option("--output,-o", analyze.output, "output directory (anova.csv, contrasts.csv)")->required();

  SimulateConfig simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate synthetic datasets with reproducible recipes");
  simulate_cmd->add_option("--scenario", simulate.scenario, "grid (one validation grid cell) or running-example")
      ->check(CLI::IsMember({"grid", "running-example"}))
      ->capture_default_str();
  simulate_cmd->add_option("--layout", simulate.layout, "2x2, 3x3 or 2x2x2")->capture_default_str();
  simulate_cmd->add_option("--distribution", simulate.distribution)->capture_default_str();
  simulate_cmd->add_option("--n", simulate.n, "observations per condition")->capture_default_str();
  simulate_cmd->add_option("--design", simulate.design)->check(kinds)->capture_default_str();
  simulate_cmd->add_flag("--alternative", simulate.alternative, "random condition locations instead of the null");
  simulate_cmd->add_option("--replications", simulate.replications)->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--seed", simulate.seed)->capture_default_str();
  simulate_cmd->add_option("--log-sd", simulate.log_sd, "lognormal scale for the running example")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate_cmd->add_option("--output,-o", simulate.output, "output directory")->required();

  ValidateConfig validate_cfg;
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo Type I error and power over the design grid");
  validate_cmd->add_option("--grid", validate_cfg.grid, "smoke or full")
      ->check(CLI::IsMember({"smoke", "full"}))
      ->capture_default_str();
  validate_cmd->add_option("--layout", validate_cfg.layouts)->delimiter(',');
  validate_cmd->add_option("--distribution", validate_cfg.distributions)->delimiter(',');
  validate_cmd->add_option("--n", validate_cfg.sizes)->delimiter(',');
  validate_cmd->add_option("--design", validate_cfg.designs)->delimiter(',');
  validate_cmd->add_option("--hypothesis", validate_cfg.hypothesis, "null, alternative or both")
      ->check(CLI::IsMember({"null", "alternative", "both"}))
      ->capture_default_str();
  validate_cmd->add_option("--replications", validate_cfg.replications)->check(CLI::PositiveNumber)->capture_default_str();
  validate_cmd->add_option("--alpha", validate_cfg.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  validate_cmd->add_option("--seed", validate_cfg.seed)->capture_default_str();
  validate_cmd->add_option("--workers", validate_cfg.workers)->check(CLI::PositiveNumber)->capture_default_str();
  validate_cmd->add_option("--output,-o", validate_cfg.output, "output directory")->required();

  DiagnoseConfig diagnose;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "check aligned responses for fat tails");
  add_schema(diagnose_cmd, diagnose.schema);
  diagnose_cmd->add_option("--target", diagnose.target)->required()->delimiter(',');
  diagnose_cmd->add_option("--output,-o", diagnose.output, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*align_cmd) cmd_align(align, *align_cmd);
    if (*analyze_cmd) cmd_analyze(analyze, *analyze_cmd);
    if (*simulate_cmd) cmd_simulate(simulate, *simulate_cmd);
    if (*validate_cmd) cmd_validate(validate_cfg, *validate_cmd, err);
    if (*diagnose_cmd) cmd_diagnose(diagnose, *diagnose_cmd, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"artc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace artc::cli
