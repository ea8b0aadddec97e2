#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tokenscope/embeddings.hpp"
#include "tokenscope/preprocess.hpp"
#include "tokenscope/scoring.hpp"

namespace tokenscope {

// Model features, in term order.
enum class Feature : std::size_t { kAngular = 0, kMagnitude = 1, kDimensional = 2, kPosition = 3 };
inline constexpr std::size_t kFeatureCount = 4;
const char* feature_name(std::size_t term_index);

struct FeatureRow {
  double angular = 0.0;
  double magnitude = 0.0;
  double dimensional = 0.0;
  double position = 0.0;                // percentile in [0, 100]
  std::optional<double> target;         // percentile rank, training rows only
  std::size_t group = 0;                // source prompt; CV folds never split a group

  std::array<double, kFeatureCount> features() const {
    return {angular, magnitude, dimensional, position};
  }
};

// 100 * index / (n - 1); 50 for a single token.
double position_percentile(std::size_t index, std::size_t n);

// Ascending-rank percentiles, 100 = largest. Ties share their mean rank.
std::vector<double> target_percentiles(const std::vector<double>& composites);

struct AnalysisOptions {
  PreprocessConfig preprocess = default_preprocess_config();
  ScoringConfig scoring;
  OovPolicy oov = OovPolicy::kZeroVector;
};

// One row per scored token; prompts that fail analysis are skipped (logged).
std::vector<FeatureRow> generate_training_data(const std::vector<std::string>& corpus,
                                               const EmbeddingTable& table,
                                               const AnalysisOptions& options);

// Rows for one analyzed prompt, targets from its composites.
std::vector<FeatureRow> feature_rows(const PromptAnalysis& analysis, std::size_t group = 0);

struct SmoothTerm {
  std::vector<double> knots;         // breakpoints, strictly ascending
  std::vector<double> coefficients;  // knots.size() + 2 cubic B-spline weights
  double feature_min = 0.0;
  double feature_max = 0.0;
  double lambda = 0.0;

  double evaluate(double x) const;
};

struct TrainingMeta {
  std::size_t rows = 0;
  std::size_t groups = 0;
  std::size_t cv_folds = 0;
  double cv_rmse = 0.0;
  double train_rmse = 0.0;
  std::uint64_t seed = 0;
};

struct GamModel {
  double beta0 = 0.0;
  std::array<SmoothTerm, kFeatureCount> terms;
  TrainingMeta training;

  double predict(double angular, double magnitude, double dimensional,
                 double position) const;
  double predict(const FeatureRow& row) const;
};

struct FitOptions {
  std::size_t knots = 10;  // interior knots per term
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::size_t cv_folds = 5;
  std::uint64_t seed = 42;
  // Skips cross-validation and uses these smoothing parameters.
  std::optional<std::array<double, kFeatureCount>> fixed_lambda;
};

// Penalized least squares on cubic B-spline bases (quantile knots) with a
// second-difference penalty per term. Each term is constrained to sum to
// zero over the training rows. Smoothing parameters are picked per term from
// the grid by k-fold cross-validated MSE, folds split by row group.
GamModel fit_gam(const std::vector<FeatureRow>& rows, const FitOptions& options = {});

// Evenly spaced grid over the term's training range, (x, s(x)) pairs.
std::vector<std::pair<double, double>> export_partial_dependence(const GamModel& model,
                                                                 std::size_t term_index,
                                                                 std::size_t grid_size);

// Sum of squared second differences of a term's coefficients.
double roughness(const SmoothTerm& term);

std::string model_to_json(const GamModel& model);
GamModel model_from_json(const std::string& text);
void save_model(const GamModel& model, const std::filesystem::path& path);
GamModel load_model(const std::filesystem::path& path);

}  // namespace tokenscope
