#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokenscope/preprocess.hpp"

namespace tokenscope {

using Vector = std::vector<double>;

// Immutable word -> vector map. Vectors live in one contiguous buffer.
class EmbeddingTable {
 public:
  struct LoadStats {
    std::size_t lines = 0;
    bool header_skipped = false;
    std::vector<std::string> duplicates;  // tokens seen more than once (last wins)
  };

  EmbeddingTable() = default;

  // Builds a table in memory. Every vector must have `dim` finite components.
  // Later duplicates replace earlier ones.
  static EmbeddingTable from_entries(
      std::size_t dim, const std::vector<std::pair<std::string, Vector>>& entries,
      std::string source_id = "memory");

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::string& source_id() const { return source_id_; }
  const LoadStats& load_stats() const { return stats_; }

  bool contains(std::string_view word) const;
  // Empty optional when `word` is out of vocabulary.
  std::optional<std::span<const double>> find(std::string_view word) const;
  // Words in insertion order (first occurrence).
  const std::vector<std::string>& words() const { return words_; }

 private:
  friend EmbeddingTable load_glove(const std::filesystem::path& path);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
  std::string source_id_;
  LoadStats stats_;
};

// Text format: "token v1 v2 ... vd" per line. A leading "count dim" header
// line is skipped. Dimension comes from the first data line. The table's
// source id is "<path>#sha256:<hex of file bytes>".
EmbeddingTable load_glove(const std::filesystem::path& path);

enum class OovPolicy { kZeroVector, kSkip, kError };

const char* oov_policy_name(OovPolicy policy);
OovPolicy parse_oov_policy(std::string_view name);

enum class Provenance { kInVocab, kOovZero, kOovSkipped };

const char* provenance_name(Provenance provenance);

struct ResolvedToken {
  Token token;
  Vector vector;
  Provenance provenance = Provenance::kInVocab;
};

struct Resolution {
  std::vector<ResolvedToken> tokens;   // kept, in prompt order
  std::vector<ResolvedToken> skipped;  // dropped under OovPolicy::kSkip
};

// Every OOV token is logged. Throws DataError listing all OOV surfaces under
// kError, and EmptyPromptError when kSkip drops everything.
Resolution resolve(const EmbeddingTable& table, const std::vector<Token>& tokens,
                   OovPolicy policy);

// Componentwise sum in sequence order.
Vector aggregate(const std::vector<ResolvedToken>& resolved);

}  // namespace tokenscope
