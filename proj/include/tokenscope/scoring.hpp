#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tokenscope/embeddings.hpp"
#include "tokenscope/preprocess.hpp"

namespace tokenscope {

// Per-token attribution. composite == (angular * magnitude) * dimensional.
struct ScoreBreakdown {
  double angular = 0.0;      // (1 - cos) / 2, in [0, 1]
  double magnitude = 0.0;    // relative norm change, in [0, 1] when clamped
  double dimensional = 0.0;  // sign-contrast weighted L1 mass, >= 0
  double composite = 0.0;
  double cos_theta = 1.0;    // diagnostic, in [-1, 1]

  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

// Weights of the sign-contrast function used by the dimensional score.
struct ScoringConfig {
  double opposite_sign_weight = 2.0;  // signs strictly differ, both nonzero
  double same_sign_weight = 1.0;      // signs agree, both nonzero
  double zero_sign_weight = 1.0;      // either component is exactly zero
  bool magnitude_clamp = true;
};

// Throws Error(kUsage) unless opposite >= same and all weights are finite
// and non-negative.
void validate(const ScoringConfig& config);

enum class Execution { kAuto, kSequential, kParallel };

struct PromptAnalysis {
  std::string text;
  std::vector<Token> tokens;            // every token of the prompt
  std::vector<ResolvedToken> resolved;  // tokens that survived the OOV policy
  std::vector<ResolvedToken> skipped;
  Vector e_orig;
  std::vector<ScoreBreakdown> breakdowns;  // parallel to `resolved`
  std::string table_provenance;
};

Vector perturbed_embedding(std::span<const double> e_orig, std::span<const double> e_tok);

struct AngularResult {
  double score = 0.0;
  double cos_theta = 1.0;
  // Set when either vector has zero norm. The cosine is undefined there and
  // the result is pinned to score 1, cos -1 (removing the token leaves nothing).
  bool degenerate = false;
};

AngularResult angular_score(std::span<const double> e_orig, std::span<const double> e_pert);

// |‖orig‖ - ‖pert‖| / ‖orig‖. Throws DegenerateInputError when ‖orig‖ == 0.
double magnitude_score(std::span<const double> e_orig, std::span<const double> e_pert,
                       const ScoringConfig& config);

double dimensional_score(std::span<const double> e_orig, std::span<const double> e_tok,
                         const ScoringConfig& config);

double composite_score(double angular, double magnitude, double dimensional);

// Full breakdown for one token given the prompt aggregate.
ScoreBreakdown score_token(std::span<const double> e_orig, std::span<const double> e_tok,
                           const ScoringConfig& config);

// Tokenize, resolve, aggregate, then score every token against the
// aggregate with that token removed. O(n * d). The per-token loop may run in
// parallel; output is identical to sequential execution.
PromptAnalysis analyze_prompt(std::string_view text, const EmbeddingTable& table,
                              const PreprocessConfig& pre_config,
                              const ScoringConfig& score_config, OovPolicy policy,
                              Execution execution = Execution::kAuto);

// Scoring step only, for callers that already resolved tokens.
std::vector<ScoreBreakdown> score_resolved(const std::vector<ResolvedToken>& resolved,
                                           std::span<const double> e_orig,
                                           const ScoringConfig& config,
                                           Execution execution = Execution::kAuto);

}  // namespace tokenscope
