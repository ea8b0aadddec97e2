// tokenscope: per-token relevance maps, GAM training and summary gap reports.

#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tokenscope/app.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/support.hpp"

namespace ts = tokenscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;
constexpr int kExitDegenerate = 5;
constexpr int kExitInternal = 70;

int exit_code(ts::ErrorKind kind) {
  switch (kind) {
    case ts::ErrorKind::kUsage: return kExitUsage;
    case ts::ErrorKind::kIo: return kExitIo;
    case ts::ErrorKind::kData: return kExitData;
    case ts::ErrorKind::kDegenerate: return kExitDegenerate;
    case ts::ErrorKind::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

void emit(const std::optional<std::string>& out_path, const std::string& artifact) {
  if (out_path) {
    ts::write_file(*out_path, artifact);
    return;
  }
  std::fwrite(artifact.data(), 1, artifact.size(), stdout);
  std::fflush(stdout);
}

struct Flags {
  std::string embeddings;
  std::string oov = "zero";
  bool no_stopword_filter = false;
  double opposite_sign_weight = 2.0;
  std::string format = "json";
  std::optional<std::string> out;
  std::optional<std::string> gam_model;
  std::size_t knots = 10;
  std::size_t cv_folds = 5;
  std::uint64_t seed = ts::kDefaultSeed;
  double sim_threshold = ts::kDefaultSimThreshold;
  bool verbose = false;
};

ts::RunConfig to_config(const Flags& f) {
  ts::RunConfig config;
  config.embeddings_path = f.embeddings;
  config.oov = ts::parse_oov_policy(f.oov);
  config.scoring.opposite_sign_weight = f.opposite_sign_weight;
  config.filter_stopwords = !f.no_stopword_filter;
  config.format = ts::parse_output_format(f.format);
  if (f.out) config.out_path = *f.out;
  if (f.gam_model) config.gam_model_path = *f.gam_model;
  config.knots = f.knots;
  config.cv_folds = f.cv_folds;
  config.seed = f.seed;
  config.sim_threshold = f.sim_threshold;
  ts::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-token relevance maps from word embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;

  app.add_option("--embeddings", flags.embeddings, "Word vectors, GloVe text format")
      ->envname("TOKENSCOPE_EMBEDDINGS")
      ->required();
  app.add_option("--oov", flags.oov, "Out-of-vocabulary policy")
      ->check(CLI::IsMember({"zero", "skip", "error"}));
  app.add_flag("--no-stopword-filter", flags.no_stopword_filter,
               "Do not de-emphasize stopwords");
  app.add_option("--opposite-sign-weight", flags.opposite_sign_weight,
                 "Dimensional weight for components opposing the prompt sign");
  app.add_option("--format", flags.format, "Output format")
      ->check(CLI::IsMember({"json", "ansi", "html"}));
  app.add_option("--out", flags.out, "Write the artifact here instead of stdout");
  app.add_option("--gam-model", flags.gam_model, "Rank tokens by this model's percentiles");
  app.add_option("--knots", flags.knots, "Interior knots per GAM term");
  app.add_option("--cv-folds", flags.cv_folds, "Cross-validation folds");
  app.add_option("--seed", flags.seed, "Seed for all randomness (default 42)");
  app.add_option("--sim-threshold", flags.sim_threshold,
                 "Cosine similarity needed for a semantic match");
  app.add_flag("-v,--verbose", flags.verbose, "Log informational messages");

  auto* analyze = app.add_subcommand("analyze", "Relevance map for one prompt");
  std::optional<std::string> prompt_text;
  std::optional<std::string> prompt_file;
  auto* text_opt = analyze->add_option("text", prompt_text, "Prompt text");
  analyze->add_option("--prompt-file", prompt_file, "Read the prompt from a file")
      ->excludes(text_opt);

  auto* train = app.add_subcommand("train-gam", "Fit a percentile GAM on a corpus");
  std::string corpus_path;
  train->add_option("corpus", corpus_path, "One prompt per line")->required();

  auto* gap = app.add_subcommand("gap", "Compare a summary against its source");
  std::string source_path;
  std::string summary_path;
  gap->add_option("source", source_path, "Source text file")->required();
  gap->add_option("summary", summary_path, "Summary text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (flags.verbose) ts::logger().set_level(spdlog::level::info);

  try {
    const ts::RunConfig config = to_config(flags);
    if (*analyze) {
      if (!prompt_text && !prompt_file) {
        throw ts::Error(ts::ErrorKind::kUsage, "analyze needs prompt text or --prompt-file");
      }
      const std::string text = prompt_file ? ts::read_file(*prompt_file) : *prompt_text;
      const ts::EmbeddingTable table = ts::load_glove(config.embeddings_path);
      emit(flags.out, ts::run_analyze(text, config, table));
    } else if (*train) {
      const std::string corpus = ts::read_file(corpus_path);
      const ts::EmbeddingTable table = ts::load_glove(config.embeddings_path);
      const ts::TrainOutput result = ts::run_train_gam(corpus, config, table);
      std::cerr << result.report;
      emit(flags.out, result.model_json);
    } else if (*gap) {
      const std::string source = ts::read_file(source_path);
      const std::string summary = ts::read_file(summary_path);
      const ts::EmbeddingTable table = ts::load_glove(config.embeddings_path);
      emit(flags.out, ts::run_gap(source, summary, config, table));
    }
  } catch (const ts::Error& e) {
    std::cerr << "tokenscope: " << ts::error_kind_name(e.kind()) << " error: " << e.what()
              << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "tokenscope: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
