#include "tokenscope/relevance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tokenscope/error.hpp"

namespace tokenscope {
namespace {

using json = nlohmann::ordered_json;

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

Band parse_band(const std::string& name, const std::string& path) {
  if (name == "high") return Band::kHigh;
  if (name == "medium") return Band::kMedium;
  if (name == "low") return Band::kLow;
  throw ParseError(path, "unknown band '" + name + "'");
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(path + "." + key, "wrong type");
  }
}

}  // namespace

const char* band_name(Band band) {
  switch (band) {
    case Band::kHigh: return "high";
    case Band::kMedium: return "medium";
    case Band::kLow: return "low";
  }
  return "?";
}

Band assign_band(double composite) {
  if (composite > 0.5) return Band::kHigh;
  if (composite >= 0.2) return Band::kMedium;
  return Band::kLow;
}

const char* ranking_source_name(RankingSource source) {
  return source == RankingSource::kComposite ? "composite" : "gam_percentile";
}

std::vector<std::size_t> RelevanceMap::ranked() const {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = entries[a];
    const auto& y = entries[b];
    if (x.display_percentile != y.display_percentile) {
      return x.display_percentile > y.display_percentile;
    }
    if (x.breakdown.composite != y.breakdown.composite) {
      return x.breakdown.composite > y.breakdown.composite;
    }
    return x.index < y.index;
  });
  return order;
}

RelevanceMap build_map(const PromptAnalysis& analysis, const GamModel* gam,
                       bool filter_stopwords, const std::string& config_digest) {
  const std::size_t n = analysis.breakdowns.size();
  if (n == 0 || analysis.resolved.size() != n) {
    throw InvariantError("relevance map needs one breakdown per resolved token");
  }
  RelevanceMap map;
  map.prompt = analysis.text;
  map.table_provenance = analysis.table_provenance;
  map.config_digest = config_digest;
  map.ranking_source = gam ? RankingSource::kGamPercentile : RankingSource::kComposite;

  std::vector<double> percentiles;
  if (gam) {
    percentiles.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& b = analysis.breakdowns[k];
      const double raw =
          gam->predict(b.angular, b.magnitude, b.dimensional, position_percentile(k, n));
      percentiles.push_back(std::clamp(raw, 0.0, 100.0));
    }
  } else {
    std::vector<double> composites;
    composites.reserve(n);
    for (const auto& b : analysis.breakdowns) composites.push_back(b.composite);
    percentiles = target_percentiles(composites);
  }

  map.entries.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Token& token = analysis.resolved[k].token;
    RelevanceEntry entry;
    entry.surface = token.surface;
    entry.normalized = token.normalized;
    entry.index = token.index;
    entry.breakdown = analysis.breakdowns[k];
    entry.display_percentile = percentiles[k];
    entry.band = assign_band(entry.breakdown.composite);
    entry.filtered = filter_stopwords && token.is_stopword;
    map.entries.push_back(std::move(entry));
  }
  return map;
}

std::string render_json(const RelevanceMap& map) {
  json doc;
  doc["prompt"] = map.prompt;
  doc["table_provenance"] = map.table_provenance;
  doc["config_digest"] = map.config_digest;
  doc["ranking_source"] = ranking_source_name(map.ranking_source);
  json tokens = json::array();
  for (const auto& e : map.entries) {
    json t;
    t["surface"] = e.surface;
    t["normalized"] = e.normalized;
    t["index"] = e.index;
    t["angular"] = e.breakdown.angular;
    t["magnitude"] = e.breakdown.magnitude;
    t["dimensional"] = e.breakdown.dimensional;
    t["composite"] = e.breakdown.composite;
    t["cos_theta"] = e.breakdown.cos_theta;
    t["display_percentile"] = e.display_percentile;
    t["band"] = band_name(e.band);
    t["filtered"] = e.filtered;
    tokens.push_back(std::move(t));
  }
  doc["tokens"] = std::move(tokens);
  return doc.dump(2) + "\n";
}

RelevanceMap parse_map_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("$", std::string("malformed relevance map: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("$", "expected an object");
  RelevanceMap map;
  map.prompt = get_field<std::string>(doc, "prompt", "$");
  map.table_provenance = get_field<std::string>(doc, "table_provenance", "$");
  map.config_digest = get_field<std::string>(doc, "config_digest", "$");
  const auto source = get_field<std::string>(doc, "ranking_source", "$");
  if (source == "composite") {
    map.ranking_source = RankingSource::kComposite;
  } else if (source == "gam_percentile") {
    map.ranking_source = RankingSource::kGamPercentile;
  } else {
    throw ParseError("$.ranking_source", "unknown ranking source '" + source + "'");
  }
  const auto tokens = doc.find("tokens");
  if (tokens == doc.end() || !tokens->is_array()) {
    throw ParseError("$.tokens", "expected an array");
  }
  for (std::size_t i = 0; i < tokens->size(); ++i) {
    const json& t = (*tokens)[i];
    const std::string path = "$.tokens[" + std::to_string(i) + "]";
    if (!t.is_object()) throw ParseError(path, "expected an object");
    RelevanceEntry e;
    e.surface = get_field<std::string>(t, "surface", path);
    e.normalized = get_field<std::string>(t, "normalized", path);
    e.index = get_field<std::size_t>(t, "index", path);
    e.breakdown.angular = get_field<double>(t, "angular", path);
    e.breakdown.magnitude = get_field<double>(t, "magnitude", path);
    e.breakdown.dimensional = get_field<double>(t, "dimensional", path);
    e.breakdown.composite = get_field<double>(t, "composite", path);
    e.breakdown.cos_theta = get_field<double>(t, "cos_theta", path);
    e.display_percentile = get_field<double>(t, "display_percentile", path);
    e.band = parse_band(get_field<std::string>(t, "band", path), path + ".band");
    e.filtered = get_field<bool>(t, "filtered", path);
    map.entries.push_back(std::move(e));
  }
  return map;
}

std::string render_ansi(const RelevanceMap& map) {
  // 256-color backgrounds, one per percentile quintile.
  static constexpr int kLevels[5] = {230, 223, 216, 209, 196};
  std::string out;
  for (std::size_t i = 0; i < map.entries.size(); ++i) {
    const auto& e = map.entries[i];
    if (i > 0) out += ' ';
    if (e.filtered) {
      out += "\x1b[2m" + e.surface + "\x1b[0m";
      continue;
    }
    const int level = std::min(4, static_cast<int>(std::floor(e.display_percentile / 20.0)));
    out += fmt::format("\x1b[30;48;5;{}m{}\x1b[0m", kLevels[level], e.surface);
  }
  out += '\n';
  return out;
}

std::string render_html(const RelevanceMap& map) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>Token relevance</title>\n</head>\n";
  out += "<body style=\"font-family:sans-serif;line-height:2.2;margin:2em\">\n";
  out += fmt::format("<p style=\"color:#555;font-size:0.8em\">ranking: {} &middot; table: {}</p>\n",
                     ranking_source_name(map.ranking_source), html_escape(map.table_provenance));
  out += "<div class=\"relevance-map\">\n";
  for (const auto& e : map.entries) {
    const double alpha = std::clamp(e.display_percentile / 100.0, 0.0, 1.0);
    const auto& b = e.breakdown;
    out += fmt::format(
        "<span class=\"token\" data-index=\"{}\" data-band=\"{}\" "
        "style=\"background-color:rgba(220,38,38,{:.3f});{}padding:2px 4px;"
        "margin:0 1px;border-radius:3px\" "
        "title=\"angular={:.6g} magnitude={:.6g} dimensional={:.6g} composite={:.6g} "
        "percentile={:.2f}\">{}</span>\n",
        e.index, band_name(e.band), alpha, e.filtered ? "opacity:0.45;" : "", b.angular,
        b.magnitude, b.dimensional, b.composite, e.display_percentile, html_escape(e.surface));
  }
  out += "</div>\n</body>\n</html>\n";
  return out;
}

}  // namespace tokenscope
