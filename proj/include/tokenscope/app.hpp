#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tokenscope/embeddings.hpp"
#include "tokenscope/gam.hpp"
#include "tokenscope/gap.hpp"
#include "tokenscope/scoring.hpp"

namespace tokenscope {

enum class OutputFormat { kJson, kAnsi, kHtml };

const char* output_format_name(OutputFormat format);
OutputFormat parse_output_format(std::string_view name);

inline constexpr std::uint64_t kDefaultSeed = 42;

// Every effective setting of a run. The CLI fills one from flags; the Python
// module from keyword arguments.
struct RunConfig {
  std::filesystem::path embeddings_path;
  OovPolicy oov = OovPolicy::kZeroVector;
  ScoringConfig scoring;
  PreprocessConfig preprocess = default_preprocess_config();
  bool filter_stopwords = true;
  OutputFormat format = OutputFormat::kJson;
  std::optional<std::filesystem::path> out_path;
  std::optional<std::filesystem::path> gam_model_path;
  std::size_t knots = 10;
  std::size_t cv_folds = 5;
  std::uint64_t seed = kDefaultSeed;
  double sim_threshold = kDefaultSimThreshold;
};

// Throws Error(kUsage) on out-of-range settings.
void validate(const RunConfig& config);

// SHA-256 of a canonical JSON rendering of the settings that affect output.
// The output path is excluded.
std::string config_digest(const RunConfig& config);

// Rendered relevance map in the configured format.
std::string run_analyze(std::string_view text, const RunConfig& config,
                        const EmbeddingTable& table);

struct TrainOutput {
  std::string model_json;
  std::string report;  // human-readable training summary
  GamModel model;
};

// Corpus is one prompt per line; blank lines are ignored.
TrainOutput run_train_gam(std::string_view corpus_text, const RunConfig& config,
                          const EmbeddingTable& table);

std::vector<std::string> parse_corpus(std::string_view corpus_text);

// GapReport JSON.
std::string run_gap(std::string_view source_text, std::string_view summary_text,
                    const RunConfig& config, const EmbeddingTable& table);

}  // namespace tokenscope
