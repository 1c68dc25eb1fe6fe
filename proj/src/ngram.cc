#include "embscore/ngram.h"

#include <algorithm>
#include <cmath>

#include "embscore/error.h"

namespace embscore {

std::size_t NGramBag::total() const {
  std::size_t t = 0;
  for (const auto& [gram, c] : counts) t += c;
  return t;
}

NGramBag MakeNGramBag(std::span<const std::string> tokens, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "n-gram order must be positive");
  NGramBag bag;
  bag.order = n;
  if (tokens.size() < n) return bag;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++bag.counts[NGram(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return bag;
}

ExactMatch ExactPR(std::span<const std::string> cand,
                   std::span<const std::string> ref, std::size_t n) {
  const NGramBag c = MakeNGramBag(cand, n);
  const NGramBag r = MakeNGramBag(ref, n);
  if (c.empty() || r.empty()) {
    throw Error(ErrorKind::kEmptyBag,
                "sentence too short for order " + std::to_string(n));
  }
  const auto hits = [](const NGramBag& from, const NGramBag& in) {
    std::size_t h = 0;
    for (const auto& [gram, count] : from.counts) {
      if (in.counts.contains(gram)) h += count;
    }
    return h;
  };
  return {static_cast<double>(hits(c, r)) / static_cast<double>(c.total()),
          static_cast<double>(hits(r, c)) / static_cast<double>(r.total())};
}

void BleuStats::Add(std::span<const std::string> cand,
                    std::span<const std::string> ref) {
  cand_length += cand.size();
  ref_length += ref.size();
  for (std::size_t n = 1; n <= matches.size(); ++n) {
    const NGramBag c = MakeNGramBag(cand, n);
    const NGramBag r = MakeNGramBag(ref, n);
    for (const auto& [gram, count] : c.counts) {
      const auto it = r.counts.find(gram);
      if (it != r.counts.end()) matches[n - 1] += std::min(count, it->second);
    }
    candidates[n - 1] += c.total();
  }
}

double BleuStats::Score(BleuSmoothing smoothing) const {
  const double add = smoothing == BleuSmoothing::kAddOne ? 1.0 : 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < matches.size(); ++n) {
    const double m = static_cast<double>(matches[n]) + add;
    const double c = static_cast<double>(candidates[n]) + add;
    if (m <= 0.0 || c <= 0.0) return 0.0;
    log_sum += std::log(m / c);
  }
  double bleu = std::exp(log_sum / static_cast<double>(matches.size()));
  if (cand_length < ref_length) {
    if (cand_length == 0) return 0.0;
    bleu *= std::exp(1.0 - static_cast<double>(ref_length) /
                               static_cast<double>(cand_length));
  }
  return bleu;
}

double CorpusBleu(std::span<const SentencePair> pairs, std::size_t max_n) {
  if (pairs.empty()) throw Error(ErrorKind::kInvalidInput, "BLEU over no pairs");
  if (max_n == 0) throw Error(ErrorKind::kInvalidInput, "max_n must be positive");
  BleuStats stats(max_n);
  for (const auto& [cand, ref] : pairs) stats.Add(cand, ref);
  return stats.Score(BleuSmoothing::kNone);
}

double SentenceBleu(std::span<const std::string> cand,
                    std::span<const std::string> ref, std::size_t max_n,
                    BleuSmoothing smoothing) {
  if (max_n == 0) throw Error(ErrorKind::kInvalidInput, "max_n must be positive");
  BleuStats stats(max_n);
  stats.Add(cand, ref);
  return stats.Score(smoothing);
}

}  // namespace embscore
