#include "tokenscope/preprocess.hpp"

#include <fstream>

#include "tokenscope/error.hpp"
#include "utf8.hpp"

namespace tokenscope {
namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20);
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 capitals, excluding the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

void append_token(std::string_view text, std::vector<utf8::CodePoint>::const_iterator first,
                  std::vector<utf8::CodePoint>::const_iterator last,
                  const PreprocessConfig& config, std::vector<Token>& out) {
  if (config.strip_punctuation) {
    while (first != last && is_punctuation(first->value)) ++first;
    while (first != last && is_punctuation((last - 1)->value)) --last;
  }
  if (first == last) return;
  const std::size_t begin = first->offset;
  const std::size_t end = (last - 1)->offset + (last - 1)->length;
  Token token;
  token.surface = std::string(text.substr(begin, end - begin));
  token.normalized = normalize(token.surface, config);
  token.index = out.size();
  token.offset = begin;
  token.is_stopword = config.mark_stopwords && config.stopwords.contains(token.normalized);
  out.push_back(std::move(token));
}

}  // namespace

PreprocessConfig default_preprocess_config() {
  PreprocessConfig config;
  config.stopwords = builtin_stopwords();
  return config;
}

std::string normalize(std::string_view fragment, const PreprocessConfig& config) {
  if (!config.lowercase) return std::string(fragment);
  std::string out;
  out.reserve(fragment.size());
  for (const auto& cp : utf8::decode(fragment)) utf8::append(out, to_lower(cp.value));
  return out;
}

std::vector<Token> tokenize(std::string_view text, const PreprocessConfig& config) {
  validate(config);
  const auto points = utf8::decode(text);
  std::vector<Token> tokens;
  auto start = points.cbegin();
  for (auto it = points.cbegin(); it != points.cend(); ++it) {
    if (is_unicode_space(it->value)) {
      append_token(text, start, it, config, tokens);
      start = it + 1;
    }
  }
  append_token(text, start, points.cend(), config, tokens);
  if (tokens.empty()) throw EmptyPromptError();
  return tokens;
}

const std::set<std::string>& builtin_stopwords() {
  static const std::set<std::string> kStopwords = {
      // Articles
      "a", "an", "the",
      // Auxiliary and modal verbs
      "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
      "do", "does", "did", "will", "would", "shall", "should", "may", "might", "must",
      "can", "could",
      // Prepositions
      "about", "above", "across", "after", "against", "along", "among", "around", "at",
      "before", "behind", "below", "between", "by", "down", "during", "for", "from", "in",
      "into", "of", "off", "on", "onto", "out", "over", "through", "to", "toward", "under",
      "until", "up", "upon", "with", "within", "without",
      // Conjunctions
      "and", "but", "or", "nor", "so", "yet", "as", "if", "than", "that", "because",
      "while", "when", "where", "whether",
      // Pronouns and determiners
      "i", "me", "my", "you", "your", "he", "him", "his", "she", "her", "it", "its", "we",
      "us", "our", "they", "them", "their", "this", "these", "those", "who", "whom",
      "which", "what", "there", "here",
  };
  return kStopwords;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path,
                                     const PreprocessConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list '" + path.string() + "'");
  std::set<std::string> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto points = utf8::decode(line, "line " + std::to_string(line_no));
    auto first = points.cbegin();
    auto last = points.cend();
    while (first != last && is_unicode_space(first->value)) ++first;
    while (first != last && is_unicode_space((last - 1)->value)) --last;
    if (first == last) continue;
    const std::size_t begin = first->offset;
    const std::size_t end = (last - 1)->offset + (last - 1)->length;
    words.insert(normalize(std::string_view(line).substr(begin, end - begin), config));
  }
  return words;
}

void validate(const PreprocessConfig& config) {
  if (!config.lowercase) return;
  for (const auto& word : config.stopwords) {
    if (normalize(word, config) != word) {
      throw DataError("stopword '" + word + "' is not in normalized form");
    }
  }
}

}  // namespace tokenscope
