#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "test_support.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/gam.hpp"
#include "tokenscope/support.hpp"

namespace ts = tokenscope;

namespace {

template <typename Target>
std::vector<ts::FeatureRow> synthetic_rows(std::size_t n, std::uint64_t seed, Target target) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> expo(0.2);
  std::vector<ts::FeatureRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    ts::FeatureRow r;
    r.angular = uni(rng);
    r.magnitude = uni(rng);
    r.dimensional = expo(rng);
    r.position = 100.0 * uni(rng);
    r.group = i / 10;
    r.target = target(r, rng);
    rows.push_back(r);
  }
  return rows;
}

ts::FitOptions fixed(double lambda) {
  ts::FitOptions options;
  options.fixed_lambda = std::array<double, 4>{lambda, lambda, lambda, lambda};
  return options;
}

double rmse(const ts::GamModel& model, const std::vector<ts::FeatureRow>& rows) {
  double sum = 0.0;
  for (const auto& r : rows) {
    const double e = model.predict(r) - *r.target;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(rows.size()));
}

auto linear_in_a = [](const ts::FeatureRow& r, auto&) { return 40.0 + 60.0 * r.angular; };

}  // namespace

TEST(Percentiles, Position) {
  EXPECT_EQ(ts::position_percentile(0, 7), 0.0);
  EXPECT_EQ(ts::position_percentile(6, 7), 100.0);
  EXPECT_EQ(ts::position_percentile(3, 7), 50.0);
  EXPECT_EQ(ts::position_percentile(0, 1), 50.0);
  EXPECT_THROW(ts::position_percentile(7, 7), ts::Error);
}

TEST(Percentiles, Targets) {
  const auto worked =
      ts::target_percentiles({0.0018, 10.60, 6.94, 3.01, 4.24, 1.74, 1.06});
  EXPECT_EQ(worked[0], 0.0);
  EXPECT_EQ(worked[1], 100.0);
  EXPECT_EQ(ts::target_percentiles({5, 5}), (std::vector<double>{50, 50}));
  EXPECT_EQ(ts::target_percentiles({1, 2, 3}), (std::vector<double>{0, 50, 100}));
  EXPECT_EQ(ts::target_percentiles({3, 1, 2}), (std::vector<double>{100, 0, 50}));
  EXPECT_EQ(ts::target_percentiles({4.0}), (std::vector<double>{100}));
  // Ranks 2 and 3 tie: mean rank 2.5 of 4 -> 50.
  EXPECT_EQ(ts::target_percentiles({1, 2, 2, 3}), (std::vector<double>{0, 50, 50, 100}));
}

TEST(TrainingData, RowsPerPrompt) {
  const auto table = ts::testing::random_table(40, 50, 8);
  const auto rows = ts::generate_training_data({"w1 w2 w3 w4 w5 w6 w7"}, table, {});
  ASSERT_EQ(rows.size(), 7u);
  std::vector<double> targets;
  for (const auto& r : rows) targets.push_back(*r.target);
  std::sort(targets.begin(), targets.end());
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(targets[i], 100.0 * i / 6.0, 1e-12);
  EXPECT_EQ(rows[3].position, 50.0);

  const auto two = ts::generate_training_data(
      {"w1 w2 w3 w4 w5 w6 w7", "w8 w9 w10 w11 w12"}, table, {});
  EXPECT_EQ(two.size(), 12u);
  EXPECT_EQ(two[7].group, 1u);
}

TEST(TrainingData, EmptyOrUnusableCorpus) {
  const auto table = ts::testing::random_table(10, 5, 8);
  EXPECT_THROW(ts::generate_training_data({}, table, {}), ts::DataError);
  EXPECT_THROW(ts::generate_training_data({"", "zzz"}, table, {}), ts::DataError);
  // Bad prompts are skipped, good ones kept.
  EXPECT_EQ(ts::generate_training_data({"", "w1 w2"}, table, {}).size(), 2u);
}

TEST(FitGam, ConstantTarget) {
  const auto rows = synthetic_rows(800, 1, [](const auto&, auto&) { return 50.0; });
  const auto model = ts::fit_gam(rows);
  EXPECT_NEAR(model.beta0, 50.0, 1e-6);
  for (std::size_t t = 0; t < 4; ++t) {
    for (const auto& [x, s] : ts::export_partial_dependence(model, t, 50)) {
      EXPECT_NEAR(s, 0.0, 1e-6) << ts::feature_name(t) << " at " << x;
    }
  }
  EXPECT_NEAR(model.predict(0.3, 0.2, 5.0, 40.0), 50.0, 1e-6);
}

TEST(FitGam, LinearSignalRecovered) {
  const auto rows = synthetic_rows(1000, 2, linear_in_a);
  const auto model = ts::fit_gam(rows);
  EXPECT_LE(rmse(model, rows), 1.0);

  double previous = -1e300;
  for (int i = 0; i < 100; ++i) {
    const double a = model.terms[0].feature_min +
                     (model.terms[0].feature_max - model.terms[0].feature_min) * i / 99.0;
    const double p = model.predict(a, 0.5, 3.0, 50.0);
    EXPECT_GE(p, previous - 1e-9);
    previous = p;
  }

  const auto pd = ts::export_partial_dependence(model, 0, 100);
  double mx = 0, my = 0;
  for (const auto& [x, s] : pd) mx += x, my += s;
  mx /= pd.size();
  my /= pd.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& [x, s] : pd) {
    sxy += (x - mx) * (s - my);
    sxx += (x - mx) * (x - mx);
    syy += (s - my) * (s - my);
  }
  EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.99);
}

TEST(FitGam, TermsCenteredOnTrainingData) {
  const auto rows = synthetic_rows(700, 3, [](const ts::FeatureRow& r, auto& rng) {
    std::normal_distribution<double> noise(0.0, 3.0);
    return 30.0 + 20.0 * r.magnitude * r.magnitude + 0.1 * r.position + noise(rng);
  });
  const auto model = ts::fit_gam(rows, fixed(1.0));
  for (std::size_t t = 0; t < 4; ++t) {
    double mean = 0.0;
    for (const auto& r : rows) mean += model.terms[t].evaluate(r.features()[t]);
    EXPECT_NEAR(mean / rows.size(), 0.0, 1e-6) << ts::feature_name(t);
  }
}

TEST(FitGam, AdditivePrediction) {
  const auto rows = synthetic_rows(700, 4, linear_in_a);
  const auto model = ts::fit_gam(rows, fixed(0.1));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-0.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    const double a = uni(rng), m = uni(rng), d = 20 * uni(rng), p = 100 * uni(rng);
    const double direct = model.beta0 + model.terms[0].evaluate(a) + model.terms[1].evaluate(m) +
                          model.terms[2].evaluate(d) + model.terms[3].evaluate(p);
    EXPECT_NEAR(model.predict(a, m, d, p), direct, 1e-9);
  }
}

TEST(FitGam, ShiftInvariance) {
  auto rows = synthetic_rows(700, 5, [](const ts::FeatureRow& r, auto& rng) {
    std::normal_distribution<double> noise(0.0, 2.0);
    return 20.0 + 50.0 * r.angular + noise(rng);
  });
  const auto base = ts::fit_gam(rows);
  for (auto& r : rows) *r.target += 12.5;
  const auto shifted = ts::fit_gam(rows);
  EXPECT_NEAR(shifted.beta0, base.beta0 + 12.5, 1e-6);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(shifted.terms[t].lambda, base.terms[t].lambda);
    for (std::size_t k = 0; k < base.terms[t].coefficients.size(); ++k) {
      EXPECT_NEAR(shifted.terms[t].coefficients[k], base.terms[t].coefficients[k], 1e-6);
    }
  }
}

TEST(FitGam, DuplicationInvariance) {
  const auto rows = synthetic_rows(600, 6, [](const ts::FeatureRow& r, auto& rng) {
    std::normal_distribution<double> noise(0.0, 2.0);
    return 10.0 + 30.0 * std::sin(3.0 * r.angular) + noise(rng);
  });
  auto doubled = rows;
  doubled.insert(doubled.end(), rows.begin(), rows.end());
  const auto a = ts::fit_gam(rows);
  const auto b = ts::fit_gam(doubled);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = uni(rng), m = uni(rng), d = 10 * uni(rng), p = 100 * uni(rng);
    EXPECT_NEAR(a.predict(x, m, d, p), b.predict(x, m, d, p), 1e-6);
  }
}

TEST(FitGam, PenaltyMonotone) {
  const auto rows = synthetic_rows(700, 7, [](const ts::FeatureRow& r, auto& rng) {
    std::normal_distribution<double> noise(0.0, 4.0);
    return 50.0 + 25.0 * std::sin(6.0 * r.angular) + noise(rng);
  });
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}) {
    ts::FitOptions options;
    options.fixed_lambda = std::array<double, 4>{lambda, 1.0, 1.0, 1.0};
    const double r = ts::roughness(ts::fit_gam(rows, options).terms[0]);
    EXPECT_LE(r, previous * (1.0 + 1e-9) + 1e-12) << "lambda " << lambda;
    previous = r;
  }
}

TEST(FitGam, DeterministicBytes) {
  const auto rows = synthetic_rows(700, 8, linear_in_a);
  EXPECT_EQ(ts::model_to_json(ts::fit_gam(rows)), ts::model_to_json(ts::fit_gam(rows)));
}

TEST(FitGam, InputErrors) {
  const auto few = synthetic_rows(100, 9, linear_in_a);
  try {
    ts::fit_gam(few);
    FAIL() << "expected too-few-rows error";
  } catch (const ts::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("too few training rows"), std::string::npos);
  }
  auto constant = synthetic_rows(700, 9, linear_in_a);
  for (auto& r : constant) r.position = 50.0;
  EXPECT_THROW(ts::fit_gam(constant), ts::DataError);
  auto missing = synthetic_rows(700, 9, linear_in_a);
  missing[3].target.reset();
  EXPECT_THROW(ts::fit_gam(missing), ts::DataError);
}

TEST(PartialDependence, GridEndpoints) {
  const auto model = ts::fit_gam(synthetic_rows(700, 10, linear_in_a), fixed(1.0));
  const auto pd = ts::export_partial_dependence(model, 2, 2);
  ASSERT_EQ(pd.size(), 2u);
  EXPECT_EQ(pd[0].first, model.terms[2].feature_min);
  EXPECT_EQ(pd[1].first, model.terms[2].feature_max);
  EXPECT_THROW(ts::export_partial_dependence(model, 4, 10), ts::Error);
}

TEST(ModelIo, RoundTripAndBytes) {
  const auto model = ts::fit_gam(synthetic_rows(700, 11, linear_in_a));
  ts::testing::TempDir dir;
  ts::save_model(model, dir / "a.json");
  ts::save_model(model, dir / "b.json");
  EXPECT_EQ(ts::read_file(dir / "a.json"), ts::read_file(dir / "b.json"));
  const auto loaded = ts::load_model(dir / "a.json");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-0.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const double a = uni(rng), m = uni(rng), d = 30 * uni(rng), p = 100 * uni(rng);
    EXPECT_NEAR(loaded.predict(a, m, d, p), model.predict(a, m, d, p), 1e-12);
  }
  EXPECT_EQ(ts::model_to_json(loaded), ts::model_to_json(model));
}

TEST(ModelIo, MalformedFiles) {
  const auto model = ts::fit_gam(synthetic_rows(700, 12, linear_in_a), fixed(1.0));
  const std::string text = ts::model_to_json(model);
  EXPECT_THROW(ts::model_from_json(text.substr(0, text.size() / 2)), ts::ParseError);

  auto doc = text;
  const auto pos = doc.find("\"coefficients\"");
  doc.replace(pos, 14, "\"coefficientz\"");
  try {
    ts::model_from_json(doc);
    FAIL();
  } catch (const ts::ParseError& e) {
    EXPECT_EQ(e.location(), "$.terms[0].coefficients");
  }
  EXPECT_THROW(ts::model_from_json("{\"format\": \"other\"}"), ts::ParseError);
}
