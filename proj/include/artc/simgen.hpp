#pragma once

#include "artc/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artc {

enum class Layout { l2x2, l3x3, l2x2x2 };
enum class Distribution { normal, lognormal, exponential, cauchy, t3, double_exponential };

std::string to_string(Layout layout);
std::string to_string(Distribution distribution);
Layout parse_layout(std::string_view text);
Distribution parse_distribution(std::string_view text);
std::vector<int> level_counts(Layout layout);

inline constexpr Layout all_layouts[] = {Layout::l2x2, Layout::l3x3, Layout::l2x2x2};
inline constexpr Distribution all_distributions[] = {Distribution::normal,      Distribution::lognormal,
                                                     Distribution::exponential, Distribution::cauchy,
                                                     Distribution::t3,          Distribution::double_exponential};
inline constexpr int all_sample_sizes[] = {8, 16, 24, 32, 40};

/// One cell of the validation grid.
struct SimDesign {
  Layout layout = Layout::l2x2;
  Distribution distribution = Distribution::normal;
  int n_per_condition = 8;
  DesignKind kind = DesignKind::between;
  /// every condition shares latent location 0
  bool null_true = true;

  /// "2x2/lognormal/n16/within/null"
  std::string id() const;
  /// Stable 64-bit key for RNG stream derivation.
  std::uint64_t key() const;
  auto operator<=>(const SimDesign&) const = default;
};

enum class StreamPurpose : std::uint64_t {
  locations = 1,
  subject_sd = 2,
  subject_offsets = 3,
  responses = 4,
};

/// Engine for one (master seed, design, replication, purpose) stream. The seed
/// is a splitmix64 mix of the key, so streams never depend on draw order elsewhere.
class SeededRng {
public:
  using engine_type = std::mt19937_64;

  SeededRng(std::uint64_t master_seed, std::uint64_t design_key, std::uint64_t replication, StreamPurpose purpose);

  engine_type& engine() { return engine_; }
  std::uint64_t stream_seed() const { return stream_seed_; }

  double uniform();   // [0, 1)
  double standard_normal();

private:
  std::uint64_t stream_seed_;
  engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// One draw with the given location and scale. Lognormal takes log-mean and
/// log-sd; exponential has mean `location` (rate 1/location) and ignores scale;
/// t3, Cauchy and double exponential are location + scale * standard variate.
double sample_distribution(Distribution distribution, double location, double scale, SeededRng& rng);

/// Maps a latent location onto the distribution's location parameter:
/// exp for the exponential (its mean must be positive), identity otherwise.
double inverse_link(Distribution distribution, double latent);

/// Everything needed to reproduce a generated dataset.
struct GenRecipe {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t stream_key = 0;
  double scale = 1.0;
  SimDesign design;
  /// per-condition latent location (conditions in cell order, last factor fastest)
  std::vector<double> latent_location;
  /// 0 for between-subjects
  double subject_sd = 0.0;
  /// per-subject offsets; all 0 for between-subjects
  std::vector<double> subject_offsets;
  /// conditions x n_per_condition: latent location plus offset, then after the inverse link
  Eigen::MatrixXd latent_by_subject;
  Eigen::MatrixXd location;
};

struct GenOptions {
  /// Forces the subject offset sd (within-subjects); normally drawn from {0.1, 0.5, 0.9}.
  std::optional<double> subject_sd;
  /// Replaces the per-condition latent locations (must match the condition count).
  std::optional<std::vector<double>> latent_location;
  /// Replaces the per-subject offsets (within-subjects; must match n_per_condition).
  std::optional<std::vector<double>> subject_offsets;
  /// Population scale; 1 throughout the validation grid.
  double scale = 1.0;
  /// Overrides SimDesign::key() when deriving RNG streams, so two designs can
  /// share draws (e.g. a within-subjects design with offsets forced to 0 and
  /// its between-subjects twin).
  std::optional<std::uint64_t> stream_key;
};

/// Generates one dataset: latent locations (0 under the null, else N(0,1)),
/// subject offsets for within-subjects designs, the inverse link (exp for the
/// exponential, identity otherwise), then one draw per (condition, subject).
/// Rows are ordered condition-major, subject-minor; factors are A, B[, C] with
/// levels A1, A2, ...; subjects are S1, S2, ...
std::pair<Dataset, GenRecipe> gen_dataset(const SimDesign& design, std::uint64_t seed, std::uint64_t replication = 0,
                                          const GenOptions& options = {});

/// Per-condition log-scale population means of the 2x2x2 worked scenario, cell order.
inline constexpr double running_example_log_means[] = {0.00, 0.50, 0.00, 0.50, 0.75, 1.25, 1.00, 0.50};

/// Within-subjects 2x2x2 lognormal scenario with 40 subjects, the fixed
/// log-scale means above and subject offset sd 0.5. `log_sd` is the lognormal
/// scale.
std::pair<Dataset, GenRecipe> gen_running_example(std::uint64_t seed, double log_sd = 0.02);

/// Key-value JSON text recording seed, design, subject sd and latent locations.
std::string recipe_json(const GenRecipe& recipe);

}  // namespace artc
