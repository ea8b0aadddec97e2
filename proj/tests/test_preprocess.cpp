#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/preprocess.hpp"

namespace ts = tokenscope;

namespace {

std::vector<std::string> normalized(const std::vector<ts::Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.normalized);
  return out;
}

}  // namespace

TEST(Tokenize, SevenTokenPrompt) {
  const auto tokens =
      ts::tokenize("The AI system processes natural language effectively",
                   ts::default_preprocess_config());
  EXPECT_EQ(normalized(tokens),
            (std::vector<std::string>{"the", "ai", "system", "processes", "natural", "language",
                                      "effectively"}));
  EXPECT_EQ(tokens[0].surface, "The");
  EXPECT_TRUE(tokens[0].is_stopword);
  EXPECT_FALSE(tokens[1].is_stopword);
}

TEST(Tokenize, EdgePunctuationIsStripped) {
  const auto tokens = ts::tokenize("Hello, world!", ts::default_preprocess_config());
  EXPECT_EQ(normalized(tokens), (std::vector<std::string>{"hello", "world"}));
  EXPECT_EQ(tokens[0].surface, "Hello");
  EXPECT_EQ(tokens[1].offset, 7u);
}

TEST(Tokenize, InteriorPunctuationIsKept) {
  const auto tokens =
      ts::tokenize("don't re-run (it) ... now", ts::default_preprocess_config());
  EXPECT_EQ(normalized(tokens), (std::vector<std::string>{"don't", "re-run", "it", "now"}));
}

TEST(Tokenize, PunctuationKeptWhenStrippingOff) {
  auto config = ts::default_preprocess_config();
  config.strip_punctuation = false;
  EXPECT_EQ(normalized(ts::tokenize("Hello, world!", config)),
            (std::vector<std::string>{"hello,", "world!"}));
}

TEST(Tokenize, EmptyInputsRaiseEmptyPrompt) {
  const auto config = ts::default_preprocess_config();
  EXPECT_THROW(ts::tokenize("", config), ts::EmptyPromptError);
  EXPECT_THROW(ts::tokenize("   \t\n", config), ts::EmptyPromptError);
  EXPECT_THROW(ts::tokenize("... !!! --", config), ts::EmptyPromptError);
}

TEST(Tokenize, UnicodeWhitespaceSplits) {
  // U+00A0 no-break space and U+3000 ideographic space.
  const auto tokens = ts::tokenize("alpha\xC2\xA0" "beta\xE3\x80\x80gamma",
                                   ts::default_preprocess_config());
  EXPECT_EQ(normalized(tokens), (std::vector<std::string>{"alpha", "beta", "gamma"}));
}

TEST(Tokenize, InvalidUtf8IsDataError) {
  EXPECT_THROW(ts::tokenize("bad \xC3\x28 byte", ts::default_preprocess_config()),
               ts::DataError);
}

TEST(Tokenize, IndicesContiguousAndSurfacesInOrder) {
  const std::string text = "  One, two;   three -- four.\tFive ";
  const auto tokens = ts::tokenize(text, ts::default_preprocess_config());
  ASSERT_EQ(tokens.size(), 5u);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    EXPECT_EQ(tokens[i].index, i);
    EXPECT_EQ(text.substr(tokens[i].offset, tokens[i].surface.size()), tokens[i].surface);
    EXPECT_FALSE(tokens[i].normalized.empty());
    EXPECT_EQ(tokens[i].normalized.find(' '), std::string::npos);
    if (i > 0) EXPECT_LT(tokens[i - 1].offset, tokens[i].offset);
  }
}

TEST(Tokenize, Deterministic) {
  const auto config = ts::default_preprocess_config();
  const std::string text = "Same input, same OUTPUT every time!";
  EXPECT_EQ(ts::tokenize(text, config), ts::tokenize(text, config));
}

TEST(Normalize, Idempotent) {
  const auto config = ts::default_preprocess_config();
  for (const std::string s : {"HeLLo", "\xC3\x89t\xC3\xA9", "MiXeD-CaSe'S", "abc"}) {
    const auto once = ts::normalize(s, config);
    EXPECT_EQ(ts::normalize(once, config), once);
  }
  EXPECT_EQ(ts::normalize("\xC3\x89T\xC3\x89", config), "\xC3\xA9t\xC3\xA9");
}

TEST(Stopwords, BuiltinMembership) {
  const auto& words = ts::builtin_stopwords();
  for (const char* w : {"the", "a", "an", "is", "are", "was", "of", "in", "to"}) {
    EXPECT_TRUE(words.count(w)) << w;
  }
  EXPECT_FALSE(words.count("ai"));
  EXPECT_FALSE(words.count("system"));
}

TEST(Stopwords, FileLoaderSkipsCommentsAndNormalizes) {
  ts::testing::TempDir dir;
  const auto path = dir / "stop.txt";
  std::ofstream(path) << "# comment\nFoo\n\n  bar  \n";
  const auto words = ts::load_stopwords(path, ts::default_preprocess_config());
  EXPECT_EQ(words, (std::set<std::string>{"bar", "foo"}));
}

TEST(Stopwords, UnnormalizedEntryRejected) {
  auto config = ts::default_preprocess_config();
  config.stopwords.insert("The");
  EXPECT_THROW(ts::validate(config), ts::DataError);
}

TEST(Stopwords, MarkingCanBeDisabled) {
  auto config = ts::default_preprocess_config();
  config.mark_stopwords = false;
  for (const auto& t : ts::tokenize("the of in", config)) EXPECT_FALSE(t.is_stopword);
}
