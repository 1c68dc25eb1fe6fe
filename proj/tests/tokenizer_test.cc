#include "embscore/tokenizer.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace embscore {
namespace {

using Pieces = std::vector<std::string>;

Vocabulary SmallVocab() {
  return Vocabulary({"[UNK]", "un", "##aff", "##able", "##a", "cat", "the", ".",
                     "##s", "a", "##ff"});
}

TEST(TokenizeTest, GreedyLongestMatch) {
  const auto seq = Tokenize("unaffable", SmallVocab());
  EXPECT_EQ(seq.pieces, (Pieces{"un", "##aff", "##able"}));
  EXPECT_EQ(seq.word_index, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_EQ(seq.is_continuation, (std::vector<bool>{false, true, true}));
}

TEST(TokenizeTest, EmptyText) {
  EXPECT_TRUE(Tokenize("", SmallVocab()).empty());
  EXPECT_TRUE(Tokenize(" \t\n", SmallVocab()).empty());
}

TEST(TokenizeTest, WholeWord) {
  const Vocabulary v({"cat", "[UNK]"});
  EXPECT_EQ(Tokenize("cat", v).pieces, (Pieces{"cat"}));
}

TEST(TokenizeTest, UnsegmentableWordBecomesUnknown) {
  const auto seq = Tokenize("the dog cats", SmallVocab());
  EXPECT_EQ(seq.pieces, (Pieces{"the", "[UNK]", "cat", "##s"}));
  EXPECT_EQ(seq.word_index, (std::vector<std::size_t>{0, 1, 2, 2}));
  EXPECT_EQ(seq.is_continuation, (std::vector<bool>{false, false, false, true}));
}

TEST(TokenizeTest, PartialSegmentationFallsBackToSingleUnknown) {
  // "unx": "un" matches, but nothing covers "x".
  EXPECT_EQ(Tokenize("unx", SmallVocab()).pieces, (Pieces{"[UNK]"}));
}

TEST(TokenizeTest, OverlongWordIsUnknown) {
  const Vocabulary v({"[UNK]", "a", "##a"}, "##", "[UNK]", 3);
  EXPECT_EQ(Tokenize("aaa", v).pieces, (Pieces{"a", "##a", "##a"}));
  EXPECT_EQ(Tokenize("aaaa", v).pieces, (Pieces{"[UNK]"}));
}

TEST(TokenizeTest, MaxWordCharsCountsCodePoints) {
  const Vocabulary v({"[UNK]", "é", "##é"}, "##", "[UNK]", 2);
  EXPECT_EQ(Tokenize("éé", v).pieces, (Pieces{"é", "##é"}));
}

TEST(TokenizeTest, UnicodeWhitespaceSplits) {
  // U+3000 ideographic space and U+00A0 no-break space.
  const auto seq = Tokenize("the\xE3\x80\x80" "cat\xC2\xA0.", SmallVocab());
  EXPECT_EQ(seq.pieces, (Pieces{"the", "cat", "."}));
}

TEST(TokenizeTest, NoCaseFolding) {
  EXPECT_EQ(Tokenize("Cat", SmallVocab()).pieces, (Pieces{"[UNK]"}));
}

TEST(TokenizeTest, CustomPrefix) {
  const Vocabulary v({"<unk>", "play", "@@ing"}, "@@", "<unk>");
  const auto seq = Tokenize("playing", v);
  EXPECT_EQ(seq.pieces, (Pieces{"play", "@@ing"}));
  EXPECT_EQ(seq.is_continuation, (std::vector<bool>{false, true}));
}

TEST(VocabularyTest, Invariants) {
  EXPECT_ERROR_KIND(Vocabulary({}), ErrorKind::kInvalidInput);
  EXPECT_ERROR_KIND(Vocabulary({"a"}), ErrorKind::kInvalidInput);
  EXPECT_ERROR_KIND(Vocabulary({"[UNK]"}, ""), ErrorKind::kInvalidInput);
}

TEST(VocabularyTest, FromFileKeepsLinesVerbatim) {
  testutil::TempDir dir;
  testutil::WriteFile(dir / "vocab.txt", "[UNK]\n cat\n##s \nthe\n");
  const auto v = Vocabulary::FromFile(dir / "vocab.txt");
  EXPECT_EQ(v.pieces(), (Pieces{"[UNK]", " cat", "##s ", "the"}));
  EXPECT_EQ(v.Id("the"), 3);
  EXPECT_EQ(v.Id("cat"), -1);
  EXPECT_FALSE(v.Contains("##s"));
}

TEST(VocabularyTest, FromFileMissing) {
  EXPECT_ERROR_KIND(Vocabulary::FromFile("/nonexistent/vocab.txt"), ErrorKind::kIo);
}

TEST(TokenSequenceTest, FromPieces) {
  const auto seq = TokenSequence::FromPieces({"##x", "a", "##b", "c"});
  EXPECT_EQ(seq.word_index, (std::vector<std::size_t>{0, 1, 1, 2}));
  EXPECT_EQ(seq.is_continuation, (std::vector<bool>{true, false, true, false}));
}

TEST(FilterTest, Examples) {
  FilterPolicy punct;
  punct.punctuation = true;
  FilterPolicy cont;
  cont.continuation = true;
  EXPECT_TRUE(IsFiltered(".", punct));
  EXPECT_TRUE(IsFiltered("##able", cont));
  EXPECT_FALSE(IsFiltered("##able", punct));
  EXPECT_FALSE(IsFiltered(".", cont));
  for (const auto& p : {FilterPolicy{}, punct, cont, FilterPolicy{true, true, "##"}}) {
    EXPECT_FALSE(IsFiltered("cat", p));
  }
}

TEST(FilterTest, EmptyPolicyNeverFilters) {
  for (const char* piece : {".", "##able", ",", "##.", "", "cat"}) {
    EXPECT_FALSE(IsFiltered(piece, FilterPolicy{}));
  }
}

TEST(FilterTest, UnicodePunctuation) {
  FilterPolicy punct;
  punct.punctuation = true;
  EXPECT_TRUE(IsFiltered("\xE2\x80\x94", punct));  // em dash, Pd
  EXPECT_TRUE(IsFiltered("\xC2\xBF", punct));      // inverted question mark, Po
  EXPECT_TRUE(IsFiltered("\xE3\x80\x82", punct));  // ideographic full stop
  EXPECT_TRUE(IsFiltered("##,", punct));           // prefix stripped first
  EXPECT_TRUE(IsFiltered("...", punct));
  EXPECT_FALSE(IsFiltered("$", punct));            // Sc, a symbol
  EXPECT_FALSE(IsFiltered("+", punct));            // Sm
  EXPECT_FALSE(IsFiltered("a.", punct));
  EXPECT_FALSE(IsFiltered("", punct));
}

TEST(UnicodeTest, DecodeAndCount) {
  EXPECT_EQ(unicode::CodePointCount("a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80"), 4u);
  std::size_t pos = 0;
  EXPECT_EQ(unicode::DecodeUtf8("\xE2\x82\xAC", pos), U'€');
  EXPECT_EQ(pos, 3u);
  pos = 0;
  EXPECT_EQ(unicode::DecodeUtf8("\xFF", pos), 0xFFu);
  EXPECT_EQ(pos, 1u);
}

TEST(SplitWhitespaceTest, Basic) {
  EXPECT_EQ(SplitWhitespace("  a  b\tc\n"), (Pieces{"a", "b", "c"}));
  EXPECT_TRUE(SplitWhitespace("").empty());
}

// Random vocabulary over a small alphabet, random words built from vocabulary
// pieces so they are always segmentable.
struct RandomCase {
  Vocabulary vocab;
  std::vector<std::string> words;
};

RandomCase MakeRandomCase(std::uint64_t seed) {
  oracle::Lcg rng(seed);
  const std::string alphabet = "abcde";
  auto random_string = [&](std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.Below(alphabet.size())];
    return s;
  };
  std::vector<std::string> initial, cont;
  for (int i = 0; i < 12; ++i) initial.push_back(random_string(1 + rng.Below(3)));
  for (int i = 0; i < 12; ++i) cont.push_back(random_string(1 + rng.Below(3)));
  // Every single character is present so every word is segmentable.
  for (char c : alphabet) {
    initial.emplace_back(1, c);
    cont.emplace_back(1, c);
  }
  std::vector<std::string> pieces = {"[UNK]"};
  for (const auto& p : initial) pieces.push_back(p);
  for (const auto& p : cont) pieces.push_back("##" + p);
  std::vector<std::string> words;
  for (int w = 0; w < 20; ++w) words.push_back(random_string(1 + rng.Below(10)));
  return {Vocabulary(pieces), words};
}

TEST(TokenizeProperty, RoundTripCoverage) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto c = MakeRandomCase(seed);
    for (const auto& w : c.words) {
      const auto seq = Tokenize(w, c.vocab);
      std::string joined;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& p = seq.pieces[i];
        joined += i == 0 ? p : p.substr(2);
        EXPECT_EQ(seq.is_continuation[i], i > 0);
      }
      EXPECT_EQ(joined, w);
    }
  }
}

TEST(TokenizeProperty, FirstPieceIsLongestPrefix) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto c = MakeRandomCase(seed);
    for (const auto& w : c.words) {
      std::size_t longest = 0;
      for (std::size_t len = 1; len <= w.size(); ++len) {
        if (c.vocab.Contains(w.substr(0, len))) longest = len;
      }
      EXPECT_EQ(Tokenize(w, c.vocab).pieces.front(), w.substr(0, longest));
    }
  }
}

TEST(TokenizeProperty, DeterministicAndAligned) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto c = MakeRandomCase(seed);
    std::string text;
    for (const auto& w : c.words) text += w + " ";
    const auto a = Tokenize(text, c.vocab);
    const auto b = Tokenize(text, c.vocab);
    EXPECT_EQ(a.pieces, b.pieces);
    EXPECT_EQ(a.word_index, b.word_index);
    ASSERT_EQ(a.pieces.size(), a.word_index.size());
    ASSERT_EQ(a.pieces.size(), a.is_continuation.size());
    for (std::size_t i = 1; i < a.size(); ++i) {
      EXPECT_LE(a.word_index[i - 1], a.word_index[i]);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a.is_continuation[i], a.pieces[i].rfind("##", 0) == 0);
    }
  }
}

}  // namespace
}  // namespace embscore
