#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "embscore/dataset.h"
#include "embscore/embeddings.h"
#include "embscore/scorer.h"

namespace embscore {

// A segment-level metric: (system, id) -> score. Scores must not depend on
// call order.
struct MetricUnderTest {
  std::string name;
  std::string fingerprint;
  std::function<double(const std::string& system, const std::string& id)> score;
};

// Scores of one metric for every (system, id), in dataset order.
struct SegmentTable {
  std::string metric;
  std::map<std::pair<std::string, std::string>, double> scores;

  double at(const std::string& system, const std::string& id) const;
};

SegmentTable ScoreSegments(const SegmentDataset& ds, const MetricUnderTest& metric);

// Precomputed tables wrapped as metrics.
MetricUnderTest MetricFromTable(std::string name, std::string fingerprint,
                                SegmentTable table);

MetricUnderTest HumanMetric(const SegmentDataset& ds);

// Smoothed sentence BLEU over whitespace-split words.
MetricUnderTest SentBleuMetric(const SegmentDataset& ds);

struct GreedyTables {
  SegmentTable precision;
  SegmentTable recall;
  SegmentTable f1;
};

// Embeds every reference and candidate once and scores all segments.
// References use ReferenceKey(id); candidates CandidateKey(system, id).
GreedyTables ScoreDatasetGreedy(const SegmentDataset& ds,
                                const EmbeddingProvider& provider,
                                const ScoreConfig& cfg);

// Embedded references and candidates of a dataset, keyed like the provider.
struct EmbeddedDataset {
  std::map<std::string, EmbeddingRecord> records;

  const EmbeddingRecord& at(const std::string& key) const;
};

EmbeddedDataset FetchDataset(const SegmentDataset& ds,
                             const EmbeddingProvider& provider);

// Unweighted mean of the metric's segment scores over all ids.
double SystemScore(const SegmentDataset& ds, const std::string& system,
                   const MetricUnderTest& metric);

struct PairwiseTau {
  std::string system_a;
  std::string system_b;
  std::size_t concordant = 0;
  std::size_t discordant = 0;
  std::optional<double> tau;
};

struct SegmentCorrelation {
  std::size_t n = 0;
  double kendall = 0.0;
  double pearson = 0.0;
  // Relative-ranking tau per system pair: over ids where both systems have
  // judgments that differ, (C - D) / (C + D), metric ties counted as
  // discordant.
  std::vector<PairwiseTau> per_system_pair;
  std::vector<double> metric_scores;  // judged segments, dataset order
  std::vector<double> human_scores;
};

SegmentCorrelation CorrelateSegments(const SegmentDataset& ds,
                                     const SegmentTable& metric);

struct HybridSystem {
  std::vector<std::size_t> assignment;  // per id (dataset order) -> system index
  double human_score = 0.0;
};

// Each hybrid independently draws a uniform system per reference id from
// substream (seed, hybrid index). Throws MissingJudgments if a drawn
// segment has no human score.
std::vector<HybridSystem> HybridSupersample(const SegmentDataset& ds,
                                            std::size_t count, std::uint64_t seed);

std::vector<double> HybridMetricScores(const SegmentDataset& ds,
                                       std::span<const HybridSystem> hybrids,
                                       const SegmentTable& metric);

struct ModelSelectionReport {
  double hits_at_1 = 0.0;
  double mrr = 0.0;
  double mean_diff = 0.0;
  std::size_t trials = 0;
  std::size_t sample_size = 0;
};

// Each trial draws `sample_size` distinct candidates from substream
// (seed, trial) and checks the metric's pick against the human ranking.
// Metric ties go to the earliest draw; human ties count as hits.
ModelSelectionReport ModelSelection(std::span<const double> human_scores,
                                    std::span<const double> metric_scores,
                                    std::size_t trials, std::size_t sample_size,
                                    std::uint64_t seed);

ModelSelectionReport ModelSelection(const SegmentDataset& ds,
                                    std::span<const HybridSystem> hybrids,
                                    const SegmentTable& metric, std::size_t trials,
                                    std::size_t sample_size, std::uint64_t seed);

struct LayerSweepResult {
  std::size_t best_layer = 0;
  std::vector<std::pair<std::size_t, double>> curve;  // (layer, pearson)
};

// Segment-level Pearson of greedy F1 against human for each layer in
// [first, last]. Needs every reference and candidate in the store.
LayerSweepResult LayerSweep(const SegmentDataset& ds, const PrecomputedStore& store,
                            std::size_t first_layer, std::size_t last_layer,
                            const ScoreConfig& cfg);

using PairMetric = std::function<double(const std::string& reference,
                                        const std::string& candidate)>;

// Scores each pair with sentence1 as the reference and returns ROC AUC.
double ParaphraseAuc(std::span<const ParaphrasePair> pairs, const PairMetric& metric);

// Williams p for every ordered metric pair (row better than column) on
// |pearson| against `human`. The shared-variable correlation is sign-adjusted
// to match the absolute values.
nlohmann::json WilliamsMatrix(const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& metric_scores,
                              std::span<const double> human);

// Bootstrap p for every ordered metric pair on Kendall tau.
nlohmann::json BootstrapMatrix(const std::vector<std::string>& names,
                               const std::vector<std::vector<double>>& metric_scores,
                               std::span<const double> human, std::size_t iterations,
                               std::uint64_t seed);

nlohmann::json ToJson(const SegmentCorrelation& c);
nlohmann::json ToJson(const ModelSelectionReport& r);

}  // namespace embscore
