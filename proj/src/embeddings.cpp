#include "tokenscope/embeddings.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>

#include "tokenscope/error.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool is_integer(std::string_view field) {
  long long value = 0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  return result.ec == std::errc{} && result.ptr == field.data() + field.size();
}

double parse_component(std::string_view field, std::size_t line_no) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last) {
    throw ParseError("line " + std::to_string(line_no),
                     "unparseable number '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no),
                     "non-finite component '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

EmbeddingTable EmbeddingTable::from_entries(
    std::size_t dim, const std::vector<std::pair<std::string, Vector>>& entries,
    std::string source_id) {
  if (dim == 0) throw DataError("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  table.source_id_ = std::move(source_id);
  for (const auto& [word, vec] : entries) {
    if (vec.size() != dim) {
      throw DataError("vector for '" + word + "' has " + std::to_string(vec.size()) +
                      " components, expected " + std::to_string(dim));
    }
    for (double v : vec) {
      if (!std::isfinite(v)) throw DataError("vector for '" + word + "' is not finite");
    }
    auto [it, inserted] = table.index_.try_emplace(word, table.words_.size());
    if (inserted) {
      table.words_.push_back(word);
      table.data_.insert(table.data_.end(), vec.begin(), vec.end());
    } else {
      table.stats_.duplicates.push_back(word);
      std::copy(vec.begin(), vec.end(), table.data_.begin() + it->second * dim);
    }
  }
  table.stats_.lines = entries.size();
  return table;
}

bool EmbeddingTable::contains(std::string_view word) const {
  return index_.find(word) != index_.end();
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

EmbeddingTable load_glove(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  EmbeddingTable table;
  table.source_id_ = path.string() + "#sha256:" + sha256_hex(bytes);

  std::string_view rest(bytes);
  std::size_t line_no = 0;
  bool first_line = true;
  while (!rest.empty()) {
    const std::size_t newline = rest.find('\n');
    std::string_view line = rest.substr(0, newline);
    rest = newline == std::string_view::npos ? std::string_view{} : rest.substr(newline + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (first_line) {
      first_line = false;
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
        table.stats_.header_skipped = true;
        continue;
      }
    }
    const std::size_t components = fields.size() - 1;
    if (table.dim_ == 0) {
      if (components == 0) {
        throw ParseError("line " + std::to_string(line_no), "token without a vector");
      }
      table.dim_ = components;
    } else if (components != table.dim_) {
      throw ParseError("line " + std::to_string(line_no),
                       "expected " + std::to_string(table.dim_) + " components, found " +
                           std::to_string(components));
    }

    const std::string word(fields[0]);
    auto [it, inserted] = table.index_.try_emplace(word, table.words_.size());
    double* dest = nullptr;
    if (inserted) {
      table.words_.push_back(word);
      table.data_.resize(table.data_.size() + table.dim_);
      dest = table.data_.data() + table.data_.size() - table.dim_;
    } else {
      logger().warn("{}: duplicate token '{}' at line {}, keeping the last occurrence",
                    path.string(), word, line_no);
      table.stats_.duplicates.push_back(word);
      dest = table.data_.data() + it->second * table.dim_;
    }
    for (std::size_t j = 0; j < components; ++j) {
      dest[j] = parse_component(fields[j + 1], line_no);
    }
    ++table.stats_.lines;
  }
  if (table.words_.empty()) {
    throw DataError("embedding file '" + path.string() + "' contains no vectors");
  }
  return table;
}

const char* oov_policy_name(OovPolicy policy) {
  switch (policy) {
    case OovPolicy::kZeroVector: return "zero";
    case OovPolicy::kSkip: return "skip";
    case OovPolicy::kError: return "error";
  }
  return "?";
}

OovPolicy parse_oov_policy(std::string_view name) {
  if (name == "zero") return OovPolicy::kZeroVector;
  if (name == "skip") return OovPolicy::kSkip;
  if (name == "error") return OovPolicy::kError;
  throw Error(ErrorKind::kUsage, "unknown OOV policy '" + std::string(name) + "'");
}

const char* provenance_name(Provenance provenance) {
  switch (provenance) {
    case Provenance::kInVocab: return "in_vocab";
    case Provenance::kOovZero: return "oov_zero";
    case Provenance::kOovSkipped: return "oov_skipped";
  }
  return "?";
}

Resolution resolve(const EmbeddingTable& table, const std::vector<Token>& tokens,
                   OovPolicy policy) {
  if (tokens.empty()) throw EmptyPromptError();
  Resolution out;
  std::vector<std::string> missing;
  for (const auto& token : tokens) {
    if (const auto vec = table.find(token.normalized)) {
      out.tokens.push_back({token, Vector(vec->begin(), vec->end()), Provenance::kInVocab});
      continue;
    }
    missing.push_back(token.surface);
    switch (policy) {
      case OovPolicy::kZeroVector:
        logger().info("out-of-vocabulary token '{}' mapped to the zero vector", token.surface);
        out.tokens.push_back({token, Vector(table.dim(), 0.0), Provenance::kOovZero});
        break;
      case OovPolicy::kSkip:
        logger().info("out-of-vocabulary token '{}' skipped", token.surface);
        out.skipped.push_back({token, Vector(table.dim(), 0.0), Provenance::kOovSkipped});
        break;
      case OovPolicy::kError:
        break;
    }
  }
  if (policy == OovPolicy::kError && !missing.empty()) {
    std::string list;
    for (const auto& word : missing) {
      if (!list.empty()) list += ", ";
      list += "'" + word + "'";
    }
    throw DataError("out-of-vocabulary tokens: " + list);
  }
  if (out.tokens.empty()) throw EmptyPromptError("empty after OOV filtering");
  return out;
}

Vector aggregate(const std::vector<ResolvedToken>& resolved) {
  if (resolved.empty()) throw InvariantError("aggregate of an empty token sequence");
  const std::size_t dim = resolved.front().vector.size();
  Vector sum(dim, 0.0);
  for (const auto& r : resolved) {
    if (r.vector.size() != dim) throw InvariantError("aggregate: dimension mismatch");
    for (std::size_t j = 0; j < dim; ++j) sum[j] += r.vector[j];
  }
  return sum;
}

}  // namespace tokenscope
