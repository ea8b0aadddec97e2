#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tokenscope/embeddings.hpp"
#include "tokenscope/gam.hpp"
#include "tokenscope/relevance.hpp"

namespace tokenscope {

inline constexpr double kDefaultSimThreshold = 0.7;

enum class MatchKind { kExact, kSemantic };

const char* match_kind_name(MatchKind kind);

// Matching works on token types (normalized forms). Indices refer to the
// first occurrence of each type in its map.
struct TokenMatch {
  std::string source;
  std::string summary;
  std::size_t source_index = 0;
  std::size_t summary_index = 0;
  MatchKind kind = MatchKind::kExact;
  double similarity = 1.0;

  friend bool operator==(const TokenMatch&, const TokenMatch&) = default;
};

// One entry per matched source type, in source order. Exact normalized-form
// matches win; otherwise the summary type with the highest cosine similarity
// at or above the threshold (first one on ties). OOV words have similarity 0.
// Filtered entries take no part on either side. Throws DataError when the
// maps were built against different tables.
std::vector<TokenMatch> match_tokens(const RelevanceMap& source, const RelevanceMap& summary,
                                     const EmbeddingTable& table,
                                     double sim_threshold = kDefaultSimThreshold);

// Importance-weighted share of source types that are matched. A type weighs
// the largest composite among its occurrences. No eligible source tokens
// gives 1 (logged); eligible tokens that all weigh zero fall back to the
// unweighted matched fraction.
double coverage_score(const RelevanceMap& source, const std::vector<TokenMatch>& matches);

struct GapToken {
  std::string normalized;
  std::string surface;
  std::size_t index = 0;  // first occurrence
  double composite = 0.0;

  friend bool operator==(const GapToken&, const GapToken&) = default;
};

struct GapReport {
  double coverage = 0.0;
  double sim_threshold = kDefaultSimThreshold;
  std::vector<TokenMatch> matches;
  std::vector<GapToken> missing;     // descending composite, then index
  std::vector<GapToken> extraneous;  // summary order
  std::string table_provenance;
  std::string config_digest;

  friend bool operator==(const GapReport&, const GapReport&) = default;
};

struct GapOptions {
  AnalysisOptions analysis;
  bool filter_stopwords = true;
  double sim_threshold = kDefaultSimThreshold;
  std::string config_digest;
};

// Analyzes both texts and compares them. Analysis failures are rethrown with
// the same error kind and a "source: " or "summary: " prefix.
GapReport gap_report(std::string_view source_text, std::string_view summary_text,
                     const EmbeddingTable& table, const GapOptions& options = {});

// Same comparison over maps that were already built.
GapReport gap_report(const RelevanceMap& source, const RelevanceMap& summary,
                     const EmbeddingTable& table, double sim_threshold = kDefaultSimThreshold);

std::string render_gap_json(const GapReport& report);

}  // namespace tokenscope
