#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "test_support.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/gap.hpp"

namespace ts = tokenscope;

namespace {

ts::RelevanceMap map_of(const std::string& text, const ts::EmbeddingTable& table,
                        bool filter = true) {
  const auto analysis = ts::analyze_prompt(text, table, ts::default_preprocess_config(), {},
                                           ts::OovPolicy::kZeroVector);
  return ts::build_map(analysis, nullptr, filter);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ab += a[j] * b[j];
    aa += a[j] * a[j];
    bb += b[j] * b[j];
  }
  return ab / std::sqrt(aa * bb);
}

ts::EmbeddingTable concept_table() {
  return ts::EmbeddingTable::from_entries(
      4, {{"the", {0.1, 0.05, 0.0, 0.02}},
          {"ai", {1.0, 0.2, 0.0, 0.1}},
          {"artificial", {0.9, 0.35, 0.1, 0.0}},
          {"system", {0.1, 1.0, 0.2, 0.0}},
          {"processes", {0.0, 0.3, 1.0, 0.1}},
          {"natural", {0.2, 0.0, 0.3, 1.0}},
          {"language", {0.3, 0.1, 0.2, 0.9}},
          {"effectively", {-0.4, 0.5, 0.4, 0.2}},
          {"red", {-1.0, 0.0, 0.0, 0.0}},
          {"blue", {0.0, -1.0, 0.0, 0.0}}},
      "concepts");
}

const char* kSource = "The AI system processes natural language effectively";

}  // namespace

TEST(Gap, IdenticalTextsCoverFully) {
  const auto table = concept_table();
  const auto report = ts::gap_report(kSource, kSource, table);
  EXPECT_EQ(report.coverage, 1.0);
  EXPECT_TRUE(report.missing.empty());
  EXPECT_TRUE(report.extraneous.empty());
  EXPECT_EQ(report.matches.size(), 6u);  // "the" is filtered
  for (const auto& m : report.matches) EXPECT_EQ(m.kind, ts::MatchKind::kExact);
}

TEST(Gap, DisjointBelowThresholdCoversNothing) {
  const auto table = concept_table();
  const auto report = ts::gap_report("ai system", "red blue", table);
  EXPECT_EQ(report.coverage, 0.0);
  EXPECT_TRUE(report.matches.empty());
  EXPECT_EQ(report.extraneous.size(), 2u);
}

TEST(Gap, SemanticMatchFollowsCosine) {
  const auto table = concept_table();
  const double sim = cosine(*table.find("ai"), *table.find("artificial"));
  ASSERT_GT(sim, 0.7);
  const auto source = map_of("ai", table);
  const auto summary = map_of("artificial", table);
  auto matches = ts::match_tokens(source, summary, table, 0.7);
  ASSERT_EQ(matches.size(), 1u);
  EXPECT_EQ(matches[0].kind, ts::MatchKind::kSemantic);
  EXPECT_NEAR(matches[0].similarity, sim, 1e-12);
  EXPECT_TRUE(ts::match_tokens(source, summary, table, std::nextafter(sim, 2.0)).empty());
}

TEST(Gap, WorkedSummaryMissingList) {
  const auto table = concept_table();
  const auto source = map_of(kSource, table);
  const auto report = ts::gap_report(kSource, "AI processes language", table);

  // Oracle: weights straight from the source map.
  double total = 0.0, covered = 0.0;
  std::vector<std::pair<double, std::string>> unmatched;
  for (const auto& e : source.entries) {
    if (e.filtered) continue;
    total += e.breakdown.composite;
    bool hit = false;
    for (const char* w : {"ai", "processes", "language"}) {
      hit = hit || e.normalized == w || cosine(*table.find(e.normalized), *table.find(w)) >= 0.7;
    }
    if (hit) {
      covered += e.breakdown.composite;
    } else {
      unmatched.emplace_back(e.breakdown.composite, e.normalized);
    }
  }
  // "natural" sits close to "language", so the semantic path is exercised.
  ASSERT_GE(cosine(*table.find("natural"), *table.find("language")), 0.7);
  EXPECT_NEAR(report.coverage, covered / total, 1e-12);
  std::sort(unmatched.rbegin(), unmatched.rend());
  ASSERT_EQ(report.missing.size(), unmatched.size());
  for (std::size_t i = 0; i < unmatched.size(); ++i) {
    EXPECT_EQ(report.missing[i].normalized, unmatched[i].second);
  }
}

TEST(Gap, ErrorsAreLabeled) {
  const auto table = concept_table();
  try {
    ts::gap_report(kSource, "", table);
    FAIL();
  } catch (const ts::Error& e) {
    EXPECT_EQ(e.kind(), ts::ErrorKind::kDegenerate);
    EXPECT_EQ(std::string(e.what()).rfind("summary: ", 0), 0u);
  }
  try {
    ts::gap_report("...", kSource, table);
    FAIL();
  } catch (const ts::Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("source: ", 0), 0u);
  }
}

TEST(Gap, TableMismatchRejected) {
  const auto table = concept_table();
  auto other = ts::EmbeddingTable::from_entries(4, {{"ai", {1, 0, 0, 0}}}, "elsewhere");
  const auto source = map_of("ai", table);
  const auto summary = map_of("ai", other);
  EXPECT_THROW(ts::match_tokens(source, summary, table), ts::DataError);
}

TEST(Gap, AllFilteredCoverageIsOne) {
  const auto table = concept_table();
  const auto source = map_of("the the", table);
  EXPECT_EQ(ts::coverage_score(source, {}), 1.0);
}

TEST(Gap, CoverageSelfIdentityOnRandomTexts) {
  const auto table = ts::testing::random_table(60, 50, 21);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const auto text = ts::testing::random_prompt(rng, 60, 3 + 4 * i);
    EXPECT_EQ(ts::gap_report(text, text, table).coverage, 1.0);
  }
}

TEST(Gap, ThresholdMonotone) {
  const auto table = ts::testing::random_table(40, 6, 22);
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto source = map_of(ts::testing::random_prompt(rng, 40, 8), table);
    const auto summary = map_of(ts::testing::random_prompt(rng, 40, 5), table);
    std::set<std::string> previous;
    bool first = true;
    for (double threshold : {-1.0, 0.0, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      std::set<std::string> current;
      for (const auto& m : ts::match_tokens(source, summary, table, threshold)) {
        current.insert(m.source);
      }
      if (!first) {
        EXPECT_TRUE(std::includes(previous.begin(), previous.end(), current.begin(),
                                  current.end()));
      }
      previous = current;
      first = false;
    }
  }
}

TEST(Gap, AddingMissingWordNeverLowersCoverage) {
  const auto table = ts::testing::random_table(40, 10, 23);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto source = ts::testing::random_prompt(rng, 40, 8);
    std::string summary = ts::testing::random_prompt(rng, 40, 3);
    const auto before = ts::gap_report(source, summary, table);
    if (before.missing.empty()) continue;
    summary += " " + before.missing.front().surface;
    EXPECT_GE(ts::gap_report(source, summary, table).coverage, before.coverage);
  }
}

TEST(Gap, JsonIsStable) {
  const auto table = concept_table();
  const auto report = ts::gap_report(kSource, "AI processes language", table);
  const auto json = ts::render_gap_json(report);
  EXPECT_EQ(json, ts::render_gap_json(ts::gap_report(kSource, "AI processes language", table)));
  EXPECT_NE(json.find("\"coverage\""), std::string::npos);
}
