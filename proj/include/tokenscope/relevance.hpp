#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tokenscope/gam.hpp"
#include "tokenscope/scoring.hpp"

namespace tokenscope {

// Composite-score bands: High > 0.5, Medium in [0.2, 0.5], Low < 0.2.
// The composite is not bounded by 1, so most content words land in High.
enum class Band { kHigh, kMedium, kLow };

const char* band_name(Band band);
Band assign_band(double composite);

enum class RankingSource { kComposite, kGamPercentile };

const char* ranking_source_name(RankingSource source);

struct RelevanceEntry {
  std::string surface;
  std::string normalized;
  std::size_t index = 0;  // token position in the prompt
  ScoreBreakdown breakdown;
  double display_percentile = 0.0;
  Band band = Band::kLow;
  bool filtered = false;  // stopword, de-emphasized but still scored

  friend bool operator==(const RelevanceEntry&, const RelevanceEntry&) = default;
};

struct RelevanceMap {
  std::string prompt;
  std::vector<RelevanceEntry> entries;  // prompt order
  RankingSource ranking_source = RankingSource::kComposite;
  std::string table_provenance;
  std::string config_digest;

  // Entry positions by descending display percentile, then descending
  // composite, then ascending token index.
  std::vector<std::size_t> ranked() const;

  friend bool operator==(const RelevanceMap&, const RelevanceMap&) = default;
};

// Display percentiles are within-prompt composite ranks, or the GAM
// prediction clamped to [0, 100] when a model is given.
RelevanceMap build_map(const PromptAnalysis& analysis, const GamModel* gam,
                       bool filter_stopwords, const std::string& config_digest = {});

// {prompt, table_provenance, config_digest, ranking_source, tokens: [...]},
// fixed key order, shortest round-trip float formatting.
std::string render_json(const RelevanceMap& map);
RelevanceMap parse_map_json(const std::string& text);

// Prompt-order tokens with a 5-step background by percentile quintile.
std::string render_ansi(const RelevanceMap& map);

// Standalone HTML page: one inline-styled span per token, no scripts.
std::string render_html(const RelevanceMap& map);

}  // namespace tokenscope
