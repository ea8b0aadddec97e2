#include "tokenscope/gap.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_map>

#include <json.hpp>

#include "tokenscope/error.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

using json = nlohmann::ordered_json;

// Unfiltered token types of a map, in order of first occurrence.
std::vector<GapToken> token_types(const RelevanceMap& map) {
  std::vector<GapToken> types;
  std::unordered_map<std::string, std::size_t> position;
  for (const auto& e : map.entries) {
    if (e.filtered) continue;
    const auto [it, inserted] = position.try_emplace(e.normalized, types.size());
    if (inserted) {
      types.push_back({e.normalized, e.surface, e.index, e.breakdown.composite});
    } else {
      auto& type = types[it->second];
      type.composite = std::max(type.composite, e.breakdown.composite);
    }
  }
  return types;
}

double cosine(std::optional<std::span<const double>> a, std::optional<std::span<const double>> b) {
  if (!a || !b) return 0.0;
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t j = 0; j < a->size(); ++j) {
    ab += (*a)[j] * (*b)[j];
    aa += (*a)[j] * (*a)[j];
    bb += (*b)[j] * (*b)[j];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

void check_threshold(double sim_threshold) {
  if (!std::isfinite(sim_threshold)) {
    throw Error(ErrorKind::kUsage, "similarity threshold must be finite");
  }
}

void check_same_table(const RelevanceMap& source, const RelevanceMap& summary) {
  if (source.table_provenance != summary.table_provenance) {
    throw DataError("source and summary were analyzed with different embedding tables ('" +
                    source.table_provenance + "' vs '" + summary.table_provenance + "')");
  }
}

template <typename F>
auto labeled(const char* label, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(label) + ": " + e.what());
  }
}

}  // namespace

const char* match_kind_name(MatchKind kind) {
  return kind == MatchKind::kExact ? "exact" : "semantic";
}

std::vector<TokenMatch> match_tokens(const RelevanceMap& source, const RelevanceMap& summary,
                                     const EmbeddingTable& table, double sim_threshold) {
  check_threshold(sim_threshold);
  check_same_table(source, summary);
  const auto source_types = token_types(source);
  const auto summary_types = token_types(summary);
  std::unordered_map<std::string, std::size_t> summary_index;
  for (std::size_t i = 0; i < summary_types.size(); ++i) {
    summary_index.emplace(summary_types[i].normalized, i);
  }
  std::vector<std::optional<std::span<const double>>> summary_vectors;
  summary_vectors.reserve(summary_types.size());
  for (const auto& t : summary_types) summary_vectors.push_back(table.find(t.normalized));

  std::vector<TokenMatch> matches;
  for (const auto& s : source_types) {
    if (const auto it = summary_index.find(s.normalized); it != summary_index.end()) {
      const auto& hit = summary_types[it->second];
      matches.push_back({s.normalized, hit.normalized, s.index, hit.index, MatchKind::kExact, 1.0});
      continue;
    }
    const auto vec = table.find(s.normalized);
    std::optional<std::size_t> best;
    double best_sim = 0.0;
    for (std::size_t i = 0; i < summary_types.size(); ++i) {
      const double sim = cosine(vec, summary_vectors[i]);
      if (sim >= sim_threshold && (!best || sim > best_sim)) {
        best = i;
        best_sim = sim;
      }
    }
    if (best) {
      const auto& hit = summary_types[*best];
      matches.push_back(
          {s.normalized, hit.normalized, s.index, hit.index, MatchKind::kSemantic, best_sim});
    }
  }
  return matches;
}

double coverage_score(const RelevanceMap& source, const std::vector<TokenMatch>& matches) {
  const auto types = token_types(source);
  if (types.empty()) {
    logger().warn("coverage: every source token is filtered; reporting 1");
    return 1.0;
  }
  std::unordered_map<std::string_view, bool> matched;
  for (const auto& m : matches) matched[m.source] = true;
  // Same order for both sums, so a full match divides a sum by itself.
  double total = 0.0;
  double covered = 0.0;
  std::size_t matched_types = 0;
  for (const auto& t : types) {
    total += t.composite;
    if (matched.count(t.normalized)) {
      covered += t.composite;
      ++matched_types;
    }
  }
  if (total == 0.0) {
    logger().warn("coverage: source composites are all zero; using the unweighted match rate");
    return static_cast<double>(matched_types) / static_cast<double>(types.size());
  }
  return std::clamp(covered / total, 0.0, 1.0);
}

GapReport gap_report(const RelevanceMap& source, const RelevanceMap& summary,
                     const EmbeddingTable& table, double sim_threshold) {
  GapReport report;
  report.sim_threshold = sim_threshold;
  report.matches = match_tokens(source, summary, table, sim_threshold);
  report.coverage = coverage_score(source, report.matches);
  report.table_provenance = source.table_provenance;
  report.config_digest = source.config_digest;

  std::unordered_map<std::string_view, bool> matched;
  for (const auto& m : report.matches) matched[m.source] = true;
  for (const auto& t : token_types(source)) {
    if (!matched.count(t.normalized)) report.missing.push_back(t);
  }
  std::stable_sort(report.missing.begin(), report.missing.end(),
                   [](const GapToken& a, const GapToken& b) {
                     if (a.composite != b.composite) return a.composite > b.composite;
                     return a.index < b.index;
                   });

  // A summary type is extraneous when nothing in the source matches it under
  // the same rule, applied in the other direction.
  const auto source_types = token_types(source);
  std::vector<std::optional<std::span<const double>>> source_vectors;
  std::unordered_map<std::string_view, bool> source_words;
  for (const auto& t : source_types) {
    source_vectors.push_back(table.find(t.normalized));
    source_words[t.normalized] = true;
  }
  for (const auto& t : token_types(summary)) {
    if (source_words.count(t.normalized)) continue;
    const auto vec = table.find(t.normalized);
    const bool similar = std::any_of(source_vectors.begin(), source_vectors.end(),
                                     [&](const auto& v) { return cosine(vec, v) >= sim_threshold; });
    if (!similar) report.extraneous.push_back(t);
  }
  return report;
}

GapReport gap_report(std::string_view source_text, std::string_view summary_text,
                     const EmbeddingTable& table, const GapOptions& options) {
  check_threshold(options.sim_threshold);
  const auto build = [&](std::string_view text) {
    const PromptAnalysis analysis =
        analyze_prompt(text, table, options.analysis.preprocess, options.analysis.scoring,
                       options.analysis.oov);
    return build_map(analysis, nullptr, options.filter_stopwords, options.config_digest);
  };
  const RelevanceMap source = labeled("source", [&] { return build(source_text); });
  const RelevanceMap summary = labeled("summary", [&] { return build(summary_text); });
  return gap_report(source, summary, table, options.sim_threshold);
}

std::string render_gap_json(const GapReport& report) {
  const auto token_json = [](const GapToken& t) {
    json j;
    j["normalized"] = t.normalized;
    j["surface"] = t.surface;
    j["index"] = t.index;
    j["composite"] = t.composite;
    return j;
  };
  json doc;
  doc["table_provenance"] = report.table_provenance;
  doc["config_digest"] = report.config_digest;
  doc["sim_threshold"] = report.sim_threshold;
  doc["coverage"] = report.coverage;
  json matches = json::array();
  for (const auto& m : report.matches) {
    json j;
    j["source"] = m.source;
    j["summary"] = m.summary;
    j["source_index"] = m.source_index;
    j["summary_index"] = m.summary_index;
    j["kind"] = match_kind_name(m.kind);
    j["similarity"] = m.similarity;
    matches.push_back(std::move(j));
  }
  doc["matches"] = std::move(matches);
  json missing = json::array();
  for (const auto& t : report.missing) missing.push_back(token_json(t));
  doc["missing"] = std::move(missing);
  json extraneous = json::array();
  for (const auto& t : report.extraneous) extraneous.push_back(token_json(t));
  doc["extraneous"] = std::move(extraneous);
  return doc.dump(2) + "\n";
}

}  // namespace tokenscope
