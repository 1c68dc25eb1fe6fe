#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "embscore/tokenizer.h"

namespace embscore {

// Smoothed inverse document frequency over a reference corpus of M
// sentences:
//
//   weight(w) = log((M + 1) / (df(w) + 1))
//
// where df(w) counts the sentences containing w at least once. Pieces never
// seen get log(M + 1), the largest possible weight; pieces present in every
// sentence get exactly 0.
class IdfTable {
 public:
  IdfTable(std::unordered_map<std::string, double> weights,
           std::size_t corpus_size, double unseen_weight);

  double Weight(std::string_view piece) const;

  std::size_t corpus_size() const { return corpus_size_; }
  double unseen_weight() const { return unseen_weight_; }
  const std::unordered_map<std::string, double>& weights() const {
    return weights_;
  }

  // Header line {"corpus_size": M, "unseen_weight": x} followed by
  // {"piece": p, "weight": x} lines sorted by piece.
  void Save(const std::filesystem::path& path) const;
  std::string Serialize() const;
  static IdfTable Load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, double> weights_;
  std::size_t corpus_size_;
  double unseen_weight_;
};

IdfTable BuildIdf(std::span<const TokenSequence> references);

inline double IdfWeight(const IdfTable& table, std::string_view piece) {
  return table.Weight(piece);
}

enum class IdfVariant {
  kIdfS,  // segment-level references
  kIdfL,  // a larger reference corpus
  kSep,   // references for the reference side, candidates for the other
};

std::string_view IdfVariantName(IdfVariant v);
IdfVariant ParseIdfVariant(std::string_view name);

// Weights for the two sides of a comparison. Both point to the same table
// unless the candidate side was built separately.
struct IdfPair {
  std::shared_ptr<const IdfTable> reference;
  std::shared_ptr<const IdfTable> candidate;
};

// IDF-S and IDF-L build one table from `references` (for IDF-L the caller
// passes the larger corpus) and use it on both sides. SEP builds the
// reference side from `references` and the candidate side from
// `candidates`.
IdfPair BuildIdfVariant(std::span<const TokenSequence> references,
                        std::span<const TokenSequence> candidates,
                        IdfVariant variant);

}  // namespace embscore
