#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "embscore/embeddings.h"
#include "embscore/idf.h"
#include "embscore/matrix.h"
#include "embscore/scorer.h"
#include "embscore/tokenizer.h"

namespace embscore {

struct Assignment {
  double total = 0.0;
  // (row, column) pairs sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> matching;
};

// Maximum-total one-to-one matching of size min(k, l). Among optimal
// matchings the lexicographically smallest sorted pair list is returned.
Assignment OptimalAssignment(const SimilarityMatrix& sim);

struct TransportProblem {
  Matrix cost;                   // k x l
  std::vector<double> ref_mass;  // k entries summing to 1
  std::vector<double> cand_mass; // l entries summing to 1
};

struct TransportPlan {
  Matrix flow;
  double objective = 0.0;
};

// Exact minimum-cost transport plan. Masses are converted to integers over a
// common denominator (rational reconstruction at 1e-9, falling back to a
// fixed 1e9 grid when the denominators do not share a small multiple) and
// solved as a min-cost flow by successive shortest paths.
TransportPlan SolveTransport(const TransportProblem& problem);

// Word mover's score between two embedded sentences: units are tokens
// (order 1) or adjacent token pairs (order 2), masses are normalized idf
// weights (uniform without idf), cost is 1 - cosine. Returns the negated
// transport objective, so larger is more similar.
double WmdScore(const EmbeddedSentence& ref, const EmbeddedSentence& cand,
                int order, const std::optional<IdfPair>& idf,
                const FilterPolicy& filter = {});

// Mass of a bigram from its members' idf weights.
double BigramMass(double first, double second);

}  // namespace embscore
