#include "artc/simgen.hpp"

#include "artc/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace artc {

std::string to_string(Layout layout) {
  switch (layout) {
    case Layout::l2x2: return "2x2";
    case Layout::l3x3: return "3x3";
    case Layout::l2x2x2: return "2x2x2";
  }
  return "?";
}

std::string to_string(Distribution distribution) {
  switch (distribution) {
    case Distribution::normal: return "normal";
    case Distribution::lognormal: return "lognormal";
    case Distribution::exponential: return "exponential";
    case Distribution::cauchy: return "cauchy";
    case Distribution::t3: return "t3";
    case Distribution::double_exponential: return "double_exponential";
  }
  return "?";
}

Layout parse_layout(std::string_view text) {
  for (Layout l : all_layouts)
    if (to_string(l) == text) return l;
  throw InvalidArgumentError("unknown layout '" + std::string(text) + "' (expected 2x2, 3x3 or 2x2x2)");
}

Distribution parse_distribution(std::string_view text) {
  for (Distribution d : all_distributions)
    if (to_string(d) == text) return d;
  throw InvalidArgumentError("unknown distribution '" + std::string(text) + "'");
}

std::vector<int> level_counts(Layout layout) {
  switch (layout) {
    case Layout::l2x2: return {2, 2};
    case Layout::l3x3: return {3, 3};
    case Layout::l2x2x2: return {2, 2, 2};
  }
  return {};
}

std::string SimDesign::id() const {
  return to_string(layout) + "/" + to_string(distribution) + "/n" + std::to_string(n_per_condition) + "/" +
         to_string(kind) + "/" + (null_true ? "null" : "alt");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SimDesign::key() const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(layout) + 1);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(distribution) + 1));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n_per_condition));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(kind) + 1));
  return splitmix64(h ^ (null_true ? 1u : 2u));
}

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t design_key, std::uint64_t replication,
                     StreamPurpose purpose)
    : stream_seed_(splitmix64(splitmix64(splitmix64(splitmix64(master_seed) ^ design_key) ^ replication) ^
                              static_cast<std::uint64_t>(purpose))),
      engine_(stream_seed_) {}

double SeededRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SeededRng::standard_normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double sample_distribution(Distribution distribution, double location, double scale, SeededRng& rng) {
  if (!(scale > 0.0)) throw InvalidArgumentError("scale must be positive");
  switch (distribution) {
    case Distribution::normal:
      return location + scale * rng.standard_normal();
    case Distribution::lognormal:
      return std::exp(location + scale * rng.standard_normal());
    case Distribution::exponential: {
      if (!(location > 0.0)) throw InvalidArgumentError("exponential location (mean) must be positive");
      return -location * std::log1p(-rng.uniform());
    }
    case Distribution::cauchy:
      return location + scale * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
    case Distribution::t3: {
      // Z / sqrt(chi2_3 / 3)
      const double z = rng.standard_normal();
      double chi2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double g = rng.standard_normal();
        chi2 += g * g;
      }
      return location + scale * z / std::sqrt(chi2 / 3.0);
    }
    case Distribution::double_exponential: {
      const double u = rng.uniform() - 0.5;
      return location - scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
  }
  throw InvalidArgumentError("unknown distribution");
}

double inverse_link(Distribution distribution, double latent) {
  return distribution == Distribution::exponential ? std::exp(latent) : latent;
}

std::pair<Dataset, GenRecipe> gen_dataset(const SimDesign& design, std::uint64_t seed, std::uint64_t replication,
                                          const GenOptions& options) {
  if (design.n_per_condition < 2) throw InvalidArgumentError("condition sample size must be at least 2");
  const std::vector<int> counts = level_counts(design.layout);
  int conditions = 1;
  for (int k : counts) conditions *= k;
  const int n = design.n_per_condition;
  const bool within = design.kind == DesignKind::within;

  GenRecipe recipe;
  recipe.seed = seed;
  recipe.replication = replication;
  recipe.stream_key = options.stream_key.value_or(design.key());
  recipe.scale = options.scale;
  recipe.design = design;
  auto stream = [&](StreamPurpose purpose) { return SeededRng(seed, recipe.stream_key, replication, purpose); };

  // Step 1: latent location per condition.
  if (options.latent_location) {
    if (static_cast<int>(options.latent_location->size()) != conditions)
      throw InvalidArgumentError("latent location count does not match the layout");
    recipe.latent_location = *options.latent_location;
  } else {
    recipe.latent_location.assign(static_cast<std::size_t>(conditions), 0.0);
    if (!design.null_true) {
      SeededRng rng = stream(StreamPurpose::locations);
      for (double& mu : recipe.latent_location) mu = rng.standard_normal();
    }
  }

  // Step 2: per-subject offsets, one sd for the whole dataset.
  recipe.subject_offsets.assign(static_cast<std::size_t>(n), 0.0);
  if (within) {
    if (options.subject_sd) {
      recipe.subject_sd = *options.subject_sd;
    } else {
      static constexpr double choices[] = {0.1, 0.5, 0.9};
      SeededRng rng = stream(StreamPurpose::subject_sd);
      recipe.subject_sd = choices[std::min(2, static_cast<int>(rng.uniform() * 3.0))];
    }
    if (options.subject_offsets) {
      if (static_cast<int>(options.subject_offsets->size()) != n)
        throw InvalidArgumentError("subject offset count does not match the sample size");
      recipe.subject_offsets = *options.subject_offsets;
    } else if (recipe.subject_sd > 0.0) {
      SeededRng rng = stream(StreamPurpose::subject_offsets);
      for (double& b : recipe.subject_offsets) b = recipe.subject_sd * rng.standard_normal();
    }
  }

  // Step 3: inverse link. Step 4: draws.
  recipe.latent_by_subject.resize(conditions, n);
  recipe.location.resize(conditions, n);
  const Eigen::Index rows = static_cast<Eigen::Index>(conditions) * n;
  Eigen::MatrixXi levels(rows, static_cast<Eigen::Index>(counts.size()));
  Eigen::VectorXd response(rows);
  Eigen::VectorXi subject(rows);

  SeededRng rng = stream(StreamPurpose::responses);
  Condition cell(counts.size(), 0);
  Eigen::Index row = 0;
  for (int c = 0; c < conditions; ++c) {
    for (int s = 0; s < n; ++s, ++row) {
      const double latent = recipe.latent_location[c] + recipe.subject_offsets[s];
      const double location = inverse_link(design.distribution, latent);
      recipe.latent_by_subject(c, s) = latent;
      recipe.location(c, s) = location;
      response[row] = sample_distribution(design.distribution, location, options.scale, rng);
      for (std::size_t j = 0; j < counts.size(); ++j) levels(row, static_cast<Eigen::Index>(j)) = cell[j];
      subject[row] = within ? s : c * n + s;
    }
    for (int j = static_cast<int>(counts.size()) - 1; j >= 0 && ++cell[j] == counts[j]; --j) cell[j] = 0;
  }

  static constexpr const char* names[] = {"A", "B", "C"};
  std::vector<FactorSpec> factors;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    FactorSpec f{names[j], {}};
    for (int l = 1; l <= counts[j]; ++l) f.levels.push_back(f.name + std::to_string(l));
    factors.push_back(std::move(f));
  }
  std::vector<std::string> subject_labels(static_cast<std::size_t>(within ? n : rows));
  for (std::size_t s = 0; s < subject_labels.size(); ++s) subject_labels[s] = "S" + std::to_string(s + 1);

  Dataset data = make_dataset(std::move(factors), std::move(levels), std::move(response), std::string("S"),
                              std::move(subject_labels), std::move(subject), "Y");
  return {std::move(data), std::move(recipe)};
}

std::pair<Dataset, GenRecipe> gen_running_example(std::uint64_t seed, double log_sd) {
  SimDesign design{Layout::l2x2x2, Distribution::lognormal, 40, DesignKind::within, false};
  GenOptions options;
  options.subject_sd = 0.5;
  options.latent_location = std::vector<double>(std::begin(running_example_log_means), std::end(running_example_log_means));
  options.scale = log_sd;
  return gen_dataset(design, seed, 0, options);
}

std::string recipe_json(const GenRecipe& recipe) {
  nlohmann::ordered_json j;
  j["seed"] = recipe.seed;
  j["replication"] = recipe.replication;
  j["stream_key"] = recipe.stream_key;
  j["design"] = {{"layout", to_string(recipe.design.layout)},
                 {"distribution", to_string(recipe.design.distribution)},
                 {"n_per_condition", recipe.design.n_per_condition},
                 {"design_kind", to_string(recipe.design.kind)},
                 {"null_true", recipe.design.null_true}};
  j["scale"] = recipe.scale;
  j["subject_sd"] = recipe.subject_sd;
  j["latent_location"] = recipe.latent_location;
  j["subject_offsets"] = recipe.subject_offsets;
  return j.dump(2) + "\n";
}

}  // namespace artc
