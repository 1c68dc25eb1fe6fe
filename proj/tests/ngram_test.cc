#include "embscore/ngram.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace embscore {
namespace {

using Words = std::vector<std::string>;

TEST(NGramBagTest, Examples) {
  const Words s = {"a", "b", "a"};
  const auto uni = MakeNGramBag(s, 1);
  EXPECT_EQ(uni.counts, (std::map<NGram, std::size_t>{{{"a"}, 2}, {{"b"}, 1}}));
  EXPECT_EQ(uni.total(), 3u);
  const auto bi = MakeNGramBag(s, 2);
  EXPECT_EQ(bi.counts, (std::map<NGram, std::size_t>{{{"a", "b"}, 1}, {{"b", "a"}, 1}}));
  EXPECT_TRUE(MakeNGramBag(Words{"a"}, 2).empty());
  EXPECT_ERROR_KIND(MakeNGramBag(s, 0), ErrorKind::kInvalidInput);
}

TEST(ExactPRTest, Examples) {
  const auto m = ExactPR(Words{"the", "cat"}, Words{"the", "cat", "sat"}, 1);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 2.0 / 3);
  const Words s = {"a", "b", "c", "d"};
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto e = ExactPR(s, s, n);
    EXPECT_EQ(e.precision, 1.0);
    EXPECT_EQ(e.recall, 1.0);
  }
  const auto d = ExactPR(Words{"a", "b"}, Words{"c", "d"}, 1);
  EXPECT_EQ(d.precision, 0.0);
  EXPECT_EQ(d.recall, 0.0);
  EXPECT_ERROR_KIND(ExactPR(Words{"a"}, Words{"a", "b"}, 2), ErrorKind::kEmptyBag);
}

TEST(ExactPRTest, TypeMembershipWithoutClipping) {
  // "the" thrice in the candidate, once in the reference: all three count.
  const auto m = ExactPR(Words{"the", "the", "the", "cat"}, Words{"the", "dog"}, 1);
  EXPECT_EQ(m.precision, 0.75);
  EXPECT_EQ(m.recall, 0.5);
}

TEST(CorpusBleuTest, Identical) {
  const std::vector<SentencePair> pairs = {{{"a", "b", "c", "d"}, {"a", "b", "c", "d"}},
                                           {{"x", "y", "z", "w", "v"}, {"x", "y", "z", "w", "v"}}};
  EXPECT_EQ(CorpusBleu(pairs), 1.0);
}

TEST(CorpusBleuTest, BrevityPenalty) {
  const std::vector<SentencePair> pairs = {{{"a", "b"}, {"a", "b", "c", "d"}}};
  EXPECT_NEAR(CorpusBleu(pairs, 1), std::exp(1.0 - 2.0), 1e-15);
  // Longer candidates are not penalized.
  const std::vector<SentencePair> longer = {{{"a", "b", "a"}, {"a", "b"}}};
  EXPECT_NEAR(CorpusBleu(longer, 1), 2.0 / 3, 1e-15);
}

TEST(CorpusBleuTest, ZeroOrderGivesZero) {
  const std::vector<SentencePair> pairs = {{{"a", "b", "c", "d"}, {"a", "b", "c", "e"}}};
  EXPECT_EQ(CorpusBleu(pairs), 0.0);
  EXPECT_ERROR_KIND(CorpusBleu(std::vector<SentencePair>{}), ErrorKind::kInvalidInput);
}

TEST(CorpusBleuTest, HandComputed) {
  // Clipped unigram matches 3/4 ("a" clipped to 2), bigrams 1/3.
  const std::vector<SentencePair> pairs = {{{"a", "a", "a", "b"}, {"a", "a", "b", "c"}}};
  EXPECT_NEAR(CorpusBleu(pairs, 2), std::sqrt(0.75 * (2.0 / 3)), 1e-15);
}

TEST(SentenceBleuTest, Examples) {
  const Words s = {"the", "cat", "sat", "down"};
  EXPECT_EQ(SentenceBleu(s, s), 1.0);
  // Disjoint 3 vs 3: smoothed precisions 1/4, 1/3, 1/2, 1/1.
  EXPECT_NEAR(SentenceBleu(Words{"a", "b", "c"}, Words{"d", "e", "f"}),
              0.4518010018049224, 1e-15);
  EXPECT_EQ(SentenceBleu(Words{"a"}, Words{"a"}), 1.0);
  EXPECT_EQ(SentenceBleu(Words{}, Words{"a"}), 0.0);
}

TEST(SentenceBleuTest, MatchesUnsmoothedCorpusBleu) {
  const Words cand = {"a", "b", "c", "d", "e", "b", "c"};
  const Words ref = {"a", "b", "c", "d", "x", "b", "c", "d"};
  const std::vector<SentencePair> one = {{cand, ref}};
  EXPECT_GT(CorpusBleu(one), 0.0);
  EXPECT_EQ(SentenceBleu(cand, ref, 4, BleuSmoothing::kNone), CorpusBleu(one));
}

Words RandomWords(oracle::Lcg& rng, std::size_t max_len) {
  Words w;
  for (std::size_t i = 0, n = rng.Below(max_len + 1); i < n; ++i) {
    w.push_back(std::string(1, static_cast<char>('a' + rng.Below(4))));
  }
  return w;
}

TEST(NGramProperty, ClippingBound) {
  oracle::Lcg rng(301);
  for (int trial = 0; trial < 300; ++trial) {
    const auto cand = RandomWords(rng, 12), ref = RandomWords(rng, 12);
    BleuStats stats(4);
    stats.Add(cand, ref);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto c = MakeNGramBag(cand, n), r = MakeNGramBag(ref, n);
      std::size_t bound = 0;
      for (const auto& [g, count] : c.counts) {
        const auto it = r.counts.find(g);
        if (it != r.counts.end()) bound += std::min(count, it->second);
      }
      EXPECT_EQ(stats.matches[n - 1], bound);
      EXPECT_LE(stats.matches[n - 1], std::min(c.total(), r.total()));
    }
  }
}

TEST(NGramProperty, ExactPRSwap) {
  oracle::Lcg rng(302);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = RandomWords(rng, 10), b = RandomWords(rng, 10);
    const std::size_t n = 1 + rng.Below(3);
    if (a.size() < n || b.size() < n) continue;
    const auto x = ExactPR(a, b, n), y = ExactPR(b, a, n);
    EXPECT_EQ(x.precision, y.recall);
    EXPECT_EQ(x.recall, y.precision);
  }
}

TEST(NGramProperty, CorpusBleuOrderInvariant) {
  oracle::Lcg rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SentencePair> pairs;
    for (int i = 0; i < 6; ++i) pairs.push_back({RandomWords(rng, 10), RandomWords(rng, 10)});
    const double a = CorpusBleu(pairs, 2);
    std::reverse(pairs.begin(), pairs.end());
    std::swap(pairs[0], pairs[3]);
    EXPECT_EQ(a, CorpusBleu(pairs, 2));
  }
}

TEST(NGramProperty, SentenceBleuInUnitInterval) {
  oracle::Lcg rng(304);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = RandomWords(rng, 10), b = RandomWords(rng, 10);
    const double s = SentenceBleu(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

}  // namespace
}  // namespace embscore
