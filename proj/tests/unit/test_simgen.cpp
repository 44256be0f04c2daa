#include "artc/errors.hpp"
#include "artc/simgen.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>

using namespace artc;

namespace {

std::vector<double> draws(Distribution dist, int n, std::uint64_t seed, double location = 0.0) {
  SeededRng rng(seed, 1, 0, StreamPurpose::responses);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& v : out) v = sample_distribution(dist, location, 1.0, rng);
  return out;
}

double quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Simgen, WorkedExampleConditionFiveSubjectTwo) {
  GenOptions options;
  options.latent_location = std::vector<double>(std::begin(running_example_log_means), std::end(running_example_log_means));
  options.subject_sd = 0.5;
  options.subject_offsets = std::vector<double>{0.3, 0.1, -0.2, 0.0};
  const auto [data, recipe] =
      gen_dataset({Layout::l2x2x2, Distribution::lognormal, 4, DesignKind::within, false}, 1, 0, options);
  EXPECT_DOUBLE_EQ(recipe.latent_location[4], 0.75);
  EXPECT_DOUBLE_EQ(recipe.latent_by_subject(4, 1), 0.85);
  EXPECT_DOUBLE_EQ(recipe.location(4, 1), 0.85);
  // Row for condition 5 (A2,B1,C1), subject 2.
  const Eigen::Index row = 4 * 4 + 1;
  EXPECT_EQ(data.condition_label(data.condition_of(row)), "A2,B1,C1");
  EXPECT_EQ(data.subject_labels[data.subject[row]], "S2");
  EXPECT_GT(data.response[row], 0.0);
}

TEST(Simgen, ExponentialUsesExpLink) {
  GenOptions options;
  options.latent_location = std::vector<double>{0.0, 1.0, -1.0, 0.5};
  const auto recipe =
      gen_dataset({Layout::l2x2, Distribution::exponential, 8, DesignKind::between, false}, 3, 0, options).second;
  EXPECT_DOUBLE_EQ(recipe.location(1, 0), std::exp(1.0));
  EXPECT_DOUBLE_EQ(recipe.location(2, 3), std::exp(-1.0));
  EXPECT_EQ(inverse_link(Distribution::normal, -2.0), -2.0);
}

TEST(Simgen, NullBetweenNormalGrandMean) {
  const auto [data, recipe] =
      gen_dataset({Layout::l2x2, Distribution::normal, 25000, DesignKind::between, true}, 5);
  EXPECT_EQ(data.rows(), 100000);
  EXPECT_NEAR(data.response.mean(), 0.0, 0.02);
  for (double mu : recipe.latent_location) EXPECT_EQ(mu, 0.0);
  for (double b : recipe.subject_offsets) EXPECT_EQ(b, 0.0);
}

TEST(Simgen, WithinWithZeroSdMatchesBetweenTwin) {
  const SimDesign within{Layout::l3x3, Distribution::t3, 8, DesignKind::within, false};
  const SimDesign between{Layout::l3x3, Distribution::t3, 8, DesignKind::between, false};
  GenOptions options;
  options.subject_sd = 0.0;
  options.stream_key = 99;
  const Dataset a = gen_dataset(within, 7, 2, options).first;
  GenOptions twin;
  twin.stream_key = 99;
  const Dataset b = gen_dataset(between, 7, 2, twin).first;
  EXPECT_EQ(a.response, b.response);
  EXPECT_EQ(a.levels, b.levels);
  EXPECT_EQ(a.subject_count(), 8);
  EXPECT_EQ(b.subject_count(), 72);
}

TEST(Simgen, NormalStandardDeviation) { EXPECT_NEAR(sd(draws(Distribution::normal, 100000, 1)), 1.0, 0.02); }

TEST(Simgen, T3Median) { EXPECT_NEAR(quantile(draws(Distribution::t3, 100000, 2), 0.5), 0.0, 0.02); }

TEST(Simgen, CauchyInterquartileRange) {
  const auto v = draws(Distribution::cauchy, 100000, 3);
  EXPECT_NEAR(quantile(v, 0.75) - quantile(v, 0.25), 2.0, 0.1);
}

TEST(Simgen, OtherDistributionMoments) {
  // Laplace(0, 1): variance 2; median 0.
  const auto laplace = draws(Distribution::double_exponential, 100000, 4);
  EXPECT_NEAR(sd(laplace), std::sqrt(2.0), 0.03);
  EXPECT_NEAR(quantile(laplace, 0.5), 0.0, 0.02);
  // Exponential with mean 2.
  EXPECT_NEAR(mean(draws(Distribution::exponential, 100000, 5, 2.0)), 2.0, 0.03);
  // Lognormal(0, 1): median 1.
  EXPECT_NEAR(quantile(draws(Distribution::lognormal, 100000, 6), 0.5), 1.0, 0.02);
}

TEST(Simgen, ScaleMustBePositive) {
  SeededRng rng(1, 1, 0, StreamPurpose::responses);
  EXPECT_THROW(sample_distribution(Distribution::normal, 0.0, 0.0, rng), InvalidArgumentError);
}

TEST(Simgen, SubjectSdFromAllowedSet) {
  std::set<double> seen;
  for (std::uint64_t rep = 0; rep < 60; ++rep) {
    const auto recipe =
        gen_dataset({Layout::l2x2, Distribution::normal, 8, DesignKind::within, true}, 9, rep).second;
    seen.insert(recipe.subject_sd);
  }
  EXPECT_EQ(seen, (std::set<double>{0.1, 0.5, 0.9}));
}

TEST(Simgen, WithinStructure) {
  for (Layout layout : all_layouts) {
    const Dataset d = gen_dataset({layout, Distribution::lognormal, 16, DesignKind::within, false}, 10).first;
    const auto cells = condition_index(d);
    const auto conditions = static_cast<Eigen::Index>(cells.size());
    EXPECT_EQ(d.rows(), conditions * 16);
    EXPECT_EQ(d.subject_count(), 16);
    std::map<std::pair<int, Condition>, int> seen;
    for (Eigen::Index i = 0; i < d.rows(); ++i) ++seen[{d.subject[i], d.condition_of(i)}];
    EXPECT_EQ(static_cast<Eigen::Index>(seen.size()), d.rows());
  }
}

TEST(Simgen, Determinism) {
  for (Distribution dist : all_distributions) {
    const SimDesign design{Layout::l2x2x2, dist, 8, DesignKind::within, false};
    const auto a = gen_dataset(design, 123, 4);
    const auto b = gen_dataset(design, 123, 4);
    EXPECT_EQ(a.first.response, b.first.response);
    EXPECT_EQ(recipe_json(a.second), recipe_json(b.second));
  }
}

TEST(Simgen, DeterministicAcrossThreads) {
  const SimDesign design{Layout::l3x3, Distribution::cauchy, 16, DesignKind::within, false};
  std::vector<Eigen::VectorXd> serial, parallel(8);
  for (std::uint64_t r = 0; r < 8; ++r) serial.push_back(gen_dataset(design, 77, r).first.response);
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t r = 8; r-- > 0;)
      pool.emplace_back([&, r] { parallel[r] = gen_dataset(design, 77, r).first.response; });
  }
  for (std::size_t r = 0; r < 8; ++r) EXPECT_EQ(serial[r], parallel[r]);
}

TEST(Simgen, StreamsAreDistinct) {
  std::set<std::uint64_t> seeds;
  const SimDesign design{Layout::l2x2, Distribution::normal, 8, DesignKind::within, false};
  for (std::uint64_t rep = 0; rep < 200; ++rep)
    for (auto purpose : {StreamPurpose::locations, StreamPurpose::subject_sd, StreamPurpose::subject_offsets,
                         StreamPurpose::responses})
      seeds.insert(SeededRng(1, design.key(), rep, purpose).stream_seed());
  EXPECT_EQ(seeds.size(), 800u);
  EXPECT_NE(gen_dataset(design, 1, 0).first.response, gen_dataset(design, 1, 1).first.response);
}

TEST(Simgen, DesignKeysDistinct) {
  std::set<std::uint64_t> keys;
  std::size_t count = 0;
  for (Layout l : all_layouts)
    for (Distribution d : all_distributions)
      for (int n : all_sample_sizes)
        for (DesignKind k : {DesignKind::between, DesignKind::within})
          for (bool null_true : {true, false}) {
            keys.insert(SimDesign{l, d, n, k, null_true}.key());
            ++count;
          }
  EXPECT_EQ(keys.size(), count);
}

TEST(Simgen, UniformInUnitInterval) {
  SeededRng rng(5, 5, 5, StreamPurpose::responses);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Simgen, RecipeJsonReproducesDataset) {
  const SimDesign design{Layout::l2x2, Distribution::exponential, 8, DesignKind::within, false};
  const auto [data, recipe] = gen_dataset(design, 31337, 6);
  const auto j = nlohmann::json::parse(recipe_json(recipe));
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 31337u);
  EXPECT_EQ(j["design"]["distribution"], "exponential");
  EXPECT_EQ(j["subject_sd"].get<double>(), recipe.subject_sd);
  EXPECT_EQ(j["latent_location"].get<std::vector<double>>(), recipe.latent_location);
  const SimDesign again{parse_layout(j["design"]["layout"].get<std::string>()),
                        parse_distribution(j["design"]["distribution"].get<std::string>()),
                        j["design"]["n_per_condition"].get<int>(),
                        parse_design_kind(j["design"]["design_kind"].get<std::string>()),
                        j["design"]["null_true"].get<bool>()};
  EXPECT_EQ(again, design);
  EXPECT_EQ(gen_dataset(again, j["seed"], j["replication"]).first.response, data.response);
}

TEST(Simgen, IdsAndParsing) {
  EXPECT_EQ((SimDesign{Layout::l2x2, Distribution::lognormal, 16, DesignKind::within, true}.id()),
            "2x2/lognormal/n16/within/null");
  EXPECT_THROW(parse_layout("4x4"), InvalidArgumentError);
  EXPECT_THROW(parse_distribution("gamma"), InvalidArgumentError);
  EXPECT_THROW(gen_dataset({Layout::l2x2, Distribution::normal, 1, DesignKind::between, true}, 1),
               InvalidArgumentError);
}

TEST(Simgen, RunningExampleLayout) {
  const auto [data, recipe] = gen_running_example(8);
  EXPECT_EQ(data.rows(), 320);
  EXPECT_EQ(data.subject_count(), 40);
  EXPECT_EQ(recipe.subject_sd, 0.5);
  EXPECT_EQ(recipe.latent_location[5], 1.25);
}
