#include "tokenscope/scoring.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <execution>
#include <numeric>

#include "tokenscope/error.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

// Work (tokens x dim) above which kAuto switches to the parallel loop.
constexpr std::size_t kParallelWork = 1u << 16;

void check_same_dim(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw DataError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void validate(const ScoringConfig& config) {
  const auto ok = [](double w) { return std::isfinite(w) && w >= 0.0; };
  if (!ok(config.opposite_sign_weight) || !ok(config.same_sign_weight) ||
      !ok(config.zero_sign_weight)) {
    throw Error(ErrorKind::kUsage, "sign weights must be finite and non-negative");
  }
  if (config.opposite_sign_weight < config.same_sign_weight) {
    throw Error(ErrorKind::kUsage,
                "opposite-sign weight must be at least the same-sign weight");
  }
}

Vector perturbed_embedding(std::span<const double> e_orig, std::span<const double> e_tok) {
  check_same_dim(e_orig, e_tok, "perturbed_embedding");
  Vector out(e_orig.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = e_orig[j] - e_tok[j];
  return out;
}

AngularResult angular_score(std::span<const double> e_orig, std::span<const double> e_pert) {
  check_same_dim(e_orig, e_pert, "angular_score");
  const double sq_orig = dot(e_orig, e_orig);
  const double sq_pert = dot(e_pert, e_pert);
  if (sq_orig == 0.0 || sq_pert == 0.0) return {1.0, -1.0, true};
  // sqrt(a * b) rather than sqrt(a) * sqrt(b): identical vectors give exactly 1.
  double cos_theta = dot(e_orig, e_pert) / std::sqrt(sq_orig * sq_pert);
  cos_theta = std::clamp(cos_theta, -1.0, 1.0);
  return {(1.0 - cos_theta) / 2.0, cos_theta, false};
}

double magnitude_score(std::span<const double> e_orig, std::span<const double> e_pert,
                       const ScoringConfig& config) {
  check_same_dim(e_orig, e_pert, "magnitude_score");
  const double norm_orig = std::sqrt(dot(e_orig, e_orig));
  if (norm_orig == 0.0) {
    throw DegenerateInputError("prompt embedding sums to the zero vector");
  }
  const double norm_pert = std::sqrt(dot(e_pert, e_pert));
  const double raw = std::abs(norm_orig - norm_pert) / norm_orig;
  if (config.magnitude_clamp && raw > 1.0) {
    logger().debug("magnitude score {} clamped to 1", raw);
    return 1.0;
  }
  return raw;
}

double dimensional_score(std::span<const double> e_orig, std::span<const double> e_tok,
                         const ScoringConfig& config) {
  check_same_dim(e_orig, e_tok, "dimensional_score");
  double sum = 0.0;
  for (std::size_t j = 0; j < e_tok.size(); ++j) {
    const int s_orig = sign(e_orig[j]);
    const int s_tok = sign(e_tok[j]);
    double weight = config.zero_sign_weight;
    if (s_orig != 0 && s_tok != 0) {
      weight = s_orig == s_tok ? config.same_sign_weight : config.opposite_sign_weight;
    }
    sum += std::abs(e_tok[j]) * weight;
  }
  return sum;
}

double composite_score(double angular, double magnitude, double dimensional) {
  return angular * magnitude * dimensional;
}

ScoreBreakdown score_token(std::span<const double> e_orig, std::span<const double> e_tok,
                           const ScoringConfig& config) {
  const Vector e_pert = perturbed_embedding(e_orig, e_tok);
  const AngularResult angular = angular_score(e_orig, e_pert);
  ScoreBreakdown out;
  out.angular = angular.score;
  out.cos_theta = angular.cos_theta;
  out.magnitude = magnitude_score(e_orig, e_pert, config);
  out.dimensional = dimensional_score(e_orig, e_tok, config);
  out.composite = composite_score(out.angular, out.magnitude, out.dimensional);
  return out;
}

std::vector<ScoreBreakdown> score_resolved(const std::vector<ResolvedToken>& resolved,
                                           std::span<const double> e_orig,
                                           const ScoringConfig& config, Execution execution) {
  validate(config);
  if (dot(e_orig, e_orig) == 0.0) {
    throw DegenerateInputError("prompt embedding sums to the zero vector");
  }
  for (const auto& r : resolved) check_same_dim(e_orig, r.vector, "score_resolved");

  std::vector<ScoreBreakdown> out(resolved.size());
  const auto score_one = [&](std::size_t k) {
    out[k] = score_token(e_orig, resolved[k].vector, config);
  };
  const bool parallel =
      execution == Execution::kParallel ||
      (execution == Execution::kAuto && resolved.size() * e_orig.size() >= kParallelWork);
  std::vector<std::size_t> order(resolved.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (parallel) {
    std::for_each(std::execution::par, order.begin(), order.end(), score_one);
  } else {
    std::for_each(order.begin(), order.end(), score_one);
  }
  return out;
}

PromptAnalysis analyze_prompt(std::string_view text, const EmbeddingTable& table,
                              const PreprocessConfig& pre_config,
                              const ScoringConfig& score_config, OovPolicy policy,
                              Execution execution) {
  validate(score_config);
  PromptAnalysis analysis;
  analysis.text = std::string(text);
  analysis.tokens = tokenize(text, pre_config);
  Resolution resolution = resolve(table, analysis.tokens, policy);
  analysis.resolved = std::move(resolution.tokens);
  analysis.skipped = std::move(resolution.skipped);
  analysis.e_orig = aggregate(analysis.resolved);
  analysis.breakdowns =
      score_resolved(analysis.resolved, analysis.e_orig, score_config, execution);
  analysis.table_provenance = table.source_id();
  return analysis;
}

}  // namespace tokenscope
