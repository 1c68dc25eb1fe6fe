#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace embscore {

using NGram = std::vector<std::string>;

struct NGramBag {
  std::size_t order = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const;
  bool empty() const { return counts.empty(); }
};

NGramBag MakeNGramBag(std::span<const std::string> tokens, std::size_t n);

struct ExactMatch {
  double precision = 0.0;
  double recall = 0.0;
};

// Exact-P_n / Exact-R_n: the share of candidate n-grams (with multiplicity)
// whose type occurs anywhere in the reference, and vice versa. No clipping.
ExactMatch ExactPR(std::span<const std::string> cand,
                   std::span<const std::string> ref, std::size_t n);

enum class BleuSmoothing {
  kNone,
  kAddOne,  // (m + 1) / (c + 1) for every order
};

struct BleuStats {
  std::vector<std::size_t> matches;     // clipped, per order
  std::vector<std::size_t> candidates;  // candidate n-gram totals, per order
  std::size_t cand_length = 0;
  std::size_t ref_length = 0;

  explicit BleuStats(std::size_t max_n = 4)
      : matches(max_n, 0), candidates(max_n, 0) {}
  void Add(std::span<const std::string> cand, std::span<const std::string> ref);
  double Score(BleuSmoothing smoothing) const;
};

using SentencePair =
    std::pair<std::vector<std::string>, std::vector<std::string>>;  // cand, ref

// Corpus BLEU: clipped matches pooled over all pairs, geometric mean of the
// per-order precisions, brevity penalty exp(1 - r/c) when c < r. Any order
// with no matches gives 0.
double CorpusBleu(std::span<const SentencePair> pairs, std::size_t max_n = 4);

double SentenceBleu(std::span<const std::string> cand,
                    std::span<const std::string> ref, std::size_t max_n = 4,
                    BleuSmoothing smoothing = BleuSmoothing::kAddOne);

}  // namespace embscore
