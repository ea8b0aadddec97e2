#include "tokenscope/app.hpp"

#include <fmt/format.h>

#include <cmath>

#include <json.hpp>

#include "tokenscope/error.hpp"
#include "tokenscope/relevance.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

AnalysisOptions analysis_options(const RunConfig& config) {
  AnalysisOptions options;
  options.preprocess = config.preprocess;
  options.scoring = config.scoring;
  options.oov = config.oov;
  return options;
}

}  // namespace

const char* output_format_name(OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson: return "json";
    case OutputFormat::kAnsi: return "ansi";
    case OutputFormat::kHtml: return "html";
  }
  return "?";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::kJson;
  if (name == "ansi") return OutputFormat::kAnsi;
  if (name == "html") return OutputFormat::kHtml;
  throw Error(ErrorKind::kUsage, "unknown output format '" + std::string(name) + "'");
}

void validate(const RunConfig& config) {
  validate(config.scoring);
  validate(config.preprocess);
  if (config.knots < 1) throw Error(ErrorKind::kUsage, "--knots must be at least 1");
  if (config.cv_folds < 2) throw Error(ErrorKind::kUsage, "--cv-folds must be at least 2");
  if (!std::isfinite(config.sim_threshold) || config.sim_threshold < -1.0 ||
      config.sim_threshold > 1.0) {
    throw Error(ErrorKind::kUsage, "--sim-threshold must lie in [-1, 1]");
  }
}

std::string config_digest(const RunConfig& config) {
  nlohmann::ordered_json doc;
  doc["embeddings"] = config.embeddings_path.generic_string();
  doc["oov"] = oov_policy_name(config.oov);
  doc["opposite_sign_weight"] = config.scoring.opposite_sign_weight;
  doc["same_sign_weight"] = config.scoring.same_sign_weight;
  doc["zero_sign_weight"] = config.scoring.zero_sign_weight;
  doc["magnitude_clamp"] = config.scoring.magnitude_clamp;
  doc["lowercase"] = config.preprocess.lowercase;
  doc["strip_punctuation"] = config.preprocess.strip_punctuation;
  doc["mark_stopwords"] = config.preprocess.mark_stopwords;
  doc["stopwords"] = config.preprocess.stopwords;
  doc["filter_stopwords"] = config.filter_stopwords;
  doc["format"] = output_format_name(config.format);
  doc["gam_model"] =
      config.gam_model_path ? nlohmann::ordered_json(config.gam_model_path->generic_string())
                            : nlohmann::ordered_json(nullptr);
  doc["knots"] = config.knots;
  doc["cv_folds"] = config.cv_folds;
  doc["seed"] = config.seed;
  doc["sim_threshold"] = config.sim_threshold;
  return sha256_hex(doc.dump());
}

std::string run_analyze(std::string_view text, const RunConfig& config,
                        const EmbeddingTable& table) {
  validate(config);
  std::optional<GamModel> gam;
  if (config.gam_model_path) gam = load_model(*config.gam_model_path);
  const PromptAnalysis analysis =
      analyze_prompt(text, table, config.preprocess, config.scoring, config.oov);
  const RelevanceMap map = build_map(analysis, gam ? &*gam : nullptr, config.filter_stopwords,
                                     config_digest(config));
  switch (config.format) {
    case OutputFormat::kJson: return render_json(map);
    case OutputFormat::kAnsi: return render_ansi(map);
    case OutputFormat::kHtml: return render_html(map);
  }
  throw InvariantError("unhandled output format");
}

std::vector<std::string> parse_corpus(std::string_view corpus_text) {
  std::vector<std::string> prompts;
  std::size_t start = 0;
  while (start <= corpus_text.size()) {
    std::size_t end = corpus_text.find('\n', start);
    if (end == std::string_view::npos) end = corpus_text.size();
    std::string_view line = corpus_text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t\f\v") != std::string_view::npos) {
      prompts.emplace_back(line);
    }
    start = end + 1;
  }
  return prompts;
}

TrainOutput run_train_gam(std::string_view corpus_text, const RunConfig& config,
                          const EmbeddingTable& table) {
  validate(config);
  const std::vector<std::string> corpus = parse_corpus(corpus_text);
  if (corpus.empty()) throw DataError("training corpus has no prompts");
  const std::vector<FeatureRow> rows =
      generate_training_data(corpus, table, analysis_options(config));
  FitOptions fit;
  fit.knots = config.knots;
  fit.cv_folds = config.cv_folds;
  fit.seed = config.seed;

  TrainOutput out;
  out.model = fit_gam(rows, fit);
  out.model_json = model_to_json(out.model);
  const TrainingMeta& meta = out.model.training;
  out.report = fmt::format("rows: {}\nprompts: {}\n", meta.rows, meta.groups);
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    out.report += fmt::format("lambda[{}]: {}\n", feature_name(t),
                              format_double(out.model.terms[t].lambda));
  }
  out.report += fmt::format("cv_rmse: {}\ntrain_rmse: {}\n", format_double(meta.cv_rmse),
                            format_double(meta.train_rmse));
  return out;
}

std::string run_gap(std::string_view source_text, std::string_view summary_text,
                    const RunConfig& config, const EmbeddingTable& table) {
  validate(config);
  GapOptions options;
  options.analysis = analysis_options(config);
  options.filter_stopwords = config.filter_stopwords;
  options.sim_threshold = config.sim_threshold;
  options.config_digest = config_digest(config);
  return render_gap_json(gap_report(source_text, summary_text, table, options));
}

}  // namespace tokenscope
