#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embscore/embeddings.h"
#include "embscore/idf.h"
#include "embscore/matrix.h"
#include "embscore/tokenizer.h"

namespace embscore {

// Rows are reference tokens, columns candidate tokens.
struct SimilarityMatrix {
  Matrix values;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
};

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool rescaled = false;
  // Set when P + R = 0 (F reported as 0) or one side had zero total weight.
  bool degenerate = false;
};

struct RescaleBaseline {
  double b_precision = 0.0;
  double b_recall = 0.0;
  double b_f1 = 0.0;
  std::size_t sample_count = 0;
  std::string provider;

  // Throws InvalidBaseline if any component is >= 1 or not finite.
  void Validate() const;

  void Save(const std::filesystem::path& path) const;
  std::string Serialize() const;
  static RescaleBaseline Load(const std::filesystem::path& path);
};

struct ScoreConfig {
  std::optional<IdfPair> idf;
  FilterPolicy filter;
  LayerPolicy layer;
  std::optional<RescaleBaseline> baseline;

  std::string Describe() const;
};

SimilarityMatrix ComputeSimilarity(const EmbeddingMatrix& ref,
                                   const EmbeddingMatrix& cand);

// Greedy matching: each reference token takes its best candidate match for
// recall, each candidate token its best reference match for precision, both
// averaged with idf weights (or uniformly). Filtered tokens drop their rows
// or columns before matching. Applies cfg.baseline when present.
ScoreTriple GreedyScore(const SimilarityMatrix& sim, const TokenSequence& ref,
                        const TokenSequence& cand, const ScoreConfig& cfg);

// Maps each component x to (x - b) / (1 - b) with its own baseline.
ScoreTriple Rescale(const ScoreTriple& t, const RescaleBaseline& base);

// Embeds nothing: both sentences already carry normalized matrices.
ScoreTriple ScorePair(const EmbeddedSentence& cand, const EmbeddedSentence& ref,
                      const ScoreConfig& cfg);

struct MultiReferenceResult {
  ScoreTriple score;
  std::size_t reference_index = 0;
};

// Best F1 over the references; ties keep the lowest index.
MultiReferenceResult MultiReferenceScore(const EmbeddedSentence& cand,
                                         std::span<const EmbeddedSentence> refs,
                                         const ScoreConfig& cfg);

// Scores `pair_count` random pairs of distinct pool sentences (first draw is
// the candidate, second the reference) without rescaling and returns the
// per-component means.
RescaleBaseline ComputeBaseline(std::span<const Sentence> pool,
                                std::size_t pair_count,
                                const EmbeddingProvider& provider,
                                const ScoreConfig& cfg, std::uint64_t seed);

}  // namespace embscore
