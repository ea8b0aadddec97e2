#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tokenscope {

struct Token {
  std::string surface;     // exact span of the input text
  std::string normalized;  // lookup form
  std::size_t index = 0;   // position in the prompt, contiguous from 0
  std::size_t offset = 0;  // byte offset of `surface` in the input text
  bool is_stopword = false;

  friend bool operator==(const Token&, const Token&) = default;
};

struct PreprocessConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool mark_stopwords = true;
  // Entries must already be in normalized form under this config.
  std::set<std::string> stopwords;
};

// Default config with the builtin stopword list installed.
PreprocessConfig default_preprocess_config();

// Lowercases ASCII and Latin-1 letters when `lowercase` is set. Idempotent.
std::string normalize(std::string_view fragment, const PreprocessConfig& config);

// Splits on Unicode whitespace, then trims leading/trailing punctuation from
// each fragment when `strip_punctuation` is on. Interior punctuation such as
// apostrophes and hyphens is kept. Throws EmptyPromptError when nothing is
// left and DataError on invalid UTF-8.
std::vector<Token> tokenize(std::string_view text, const PreprocessConfig& config);

// Articles, auxiliaries, prepositions, pronouns and conjunctions.
const std::set<std::string>& builtin_stopwords();

// One word per line, '#' comments and blank lines ignored. Entries are
// normalized under `config`.
std::set<std::string> load_stopwords(const std::filesystem::path& path,
                                     const PreprocessConfig& config);

// Throws DataError if a stopword entry is not in normalized form.
void validate(const PreprocessConfig& config);

}  // namespace tokenscope
