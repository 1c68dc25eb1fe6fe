#include "embscore/scorer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embscore/error.h"
#include "embscore/random.h"

namespace embscore {

using nlohmann::json;

namespace {

constexpr double kHarmonicEps = 1e-12;

struct SideStats {
  double value = 0.0;
  bool zero_weight = false;
};

// Weighted mean of per-line maxima. `lines` indexes the surviving rows (or
// columns when `by_column`), `others` the surviving entries to scan.
SideStats WeightedMaxMean(const Matrix& sim, const std::vector<std::size_t>& lines,
                          const std::vector<std::size_t>& others, bool by_column,
                          const std::vector<double>& weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    double best = -INFINITY;
    for (std::size_t o : others) {
      const double s = by_column ? sim(o, lines[k]) : sim(lines[k], o);
      best = std::max(best, std::clamp(s, -1.0, 1.0));
    }
    num += weights[k] * best;
    den += weights[k];
  }
  if (den <= 0.0) return {0.0, true};
  return {num / den, false};
}

}  // namespace

void RescaleBaseline::Validate() const {
  for (double b : {b_precision, b_recall, b_f1}) {
    if (!std::isfinite(b) || b >= 1.0) {
      throw Error(ErrorKind::kInvalidBaseline,
                  "baseline component " + std::to_string(b) + " is not below 1");
    }
  }
}

std::string RescaleBaseline::Serialize() const {
  json j;
  j["b_P"] = b_precision;
  j["b_R"] = b_recall;
  j["b_F"] = b_f1;
  j["samples"] = sample_count;
  j["provider"] = provider;
  return j.dump();
}

void RescaleBaseline::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << Serialize() << '\n';
}

RescaleBaseline RescaleBaseline::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open baseline " + path.string());
  try {
    const json j = json::parse(in);
    RescaleBaseline b;
    b.b_precision = j.at("b_P").get<double>();
    b.b_recall = j.at("b_R").get<double>();
    b.b_f1 = j.at("b_F").get<double>();
    b.sample_count = j.at("samples").get<std::size_t>();
    b.provider = j.value("provider", std::string());
    b.Validate();
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

std::string ScoreConfig::Describe() const {
  std::string s = "layer=" + layer.Describe();
  s += idf ? (idf->reference == idf->candidate ? ";idf=shared" : ";idf=sep")
           : ";idf=off";
  s += ";filter=";
  if (filter.empty()) s += "none";
  if (filter.punctuation) s += "punct";
  if (filter.punctuation && filter.continuation) s += '+';
  if (filter.continuation) s += "subword";
  s += baseline ? ";rescale=on" : ";rescale=off";
  return s;
}

SimilarityMatrix ComputeSimilarity(const EmbeddingMatrix& ref,
                                   const EmbeddingMatrix& cand) {
  if (!ref.normalized || !cand.normalized) {
    throw Error(ErrorKind::kNotNormalized, "similarity needs normalized rows");
  }
  if (ref.dim() != cand.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding dims " + std::to_string(ref.dim()) + " vs " +
                    std::to_string(cand.dim()));
  }
  SimilarityMatrix sim{Matrix(ref.rows(), cand.rows())};
  for (std::size_t i = 0; i < ref.rows(); ++i) {
    const auto r = ref.values.row(i);
    for (std::size_t j = 0; j < cand.rows(); ++j) {
      sim.values(i, j) = Dot(r, cand.values.row(j));
    }
  }
  return sim;
}

ScoreTriple GreedyScore(const SimilarityMatrix& sim, const TokenSequence& ref,
                        const TokenSequence& cand, const ScoreConfig& cfg) {
  if (ref.empty() || cand.empty()) {
    throw Error(ErrorKind::kEmptySentence, "cannot score an empty sentence");
  }
  if (sim.rows() != ref.size() || sim.cols() != cand.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "similarity matrix shape does not match token counts");
  }
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (!IsFiltered(ref.pieces[i], cfg.filter)) rows.push_back(i);
  }
  for (std::size_t j = 0; j < cand.size(); ++j) {
    if (!IsFiltered(cand.pieces[j], cfg.filter)) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) {
    throw Error(ErrorKind::kEmptyAfterFilter,
                rows.empty() ? "every reference token was filtered"
                             : "every candidate token was filtered");
  }

  std::vector<double> ref_w(rows.size(), 1.0);
  std::vector<double> cand_w(cols.size(), 1.0);
  if (cfg.idf) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ref_w[k] = cfg.idf->reference->Weight(ref.pieces[rows[k]]);
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
      cand_w[k] = cfg.idf->candidate->Weight(cand.pieces[cols[k]]);
    }
  }

  const SideStats recall = WeightedMaxMean(sim.values, rows, cols, false, ref_w);
  const SideStats precision = WeightedMaxMean(sim.values, cols, rows, true, cand_w);

  ScoreTriple t;
  t.precision = precision.value;
  t.recall = recall.value;
  t.degenerate = recall.zero_weight || precision.zero_weight;
  const double sum = t.precision + t.recall;
  if (std::fabs(sum) <= kHarmonicEps) {
    t.f1 = 0.0;
    t.degenerate = true;
  } else {
    t.f1 = 2.0 * t.precision * t.recall / sum;
  }
  if (cfg.baseline) return Rescale(t, *cfg.baseline);
  return t;
}

ScoreTriple Rescale(const ScoreTriple& t, const RescaleBaseline& base) {
  if (t.rescaled) throw Error(ErrorKind::kAlreadyRescaled, "triple already rescaled");
  base.Validate();
  ScoreTriple out = t;
  out.precision = (t.precision - base.b_precision) / (1.0 - base.b_precision);
  out.recall = (t.recall - base.b_recall) / (1.0 - base.b_recall);
  out.f1 = (t.f1 - base.b_f1) / (1.0 - base.b_f1);
  out.rescaled = true;
  return out;
}

ScoreTriple ScorePair(const EmbeddedSentence& cand, const EmbeddedSentence& ref,
                      const ScoreConfig& cfg) {
  if (ref.tokens.empty() || cand.tokens.empty()) {
    throw Error(ErrorKind::kEmptySentence, "cannot score an empty sentence");
  }
  return GreedyScore(ComputeSimilarity(ref.matrix, cand.matrix), ref.tokens,
                     cand.tokens, cfg);
}

MultiReferenceResult MultiReferenceScore(const EmbeddedSentence& cand,
                                         std::span<const EmbeddedSentence> refs,
                                         const ScoreConfig& cfg) {
  if (refs.empty()) {
    throw Error(ErrorKind::kInvalidInput, "multi-reference scoring needs a reference");
  }
  MultiReferenceResult best{ScorePair(cand, refs[0], cfg), 0};
  for (std::size_t i = 1; i < refs.size(); ++i) {
    const ScoreTriple t = ScorePair(cand, refs[i], cfg);
    if (t.f1 > best.score.f1) best = {t, i};
  }
  return best;
}

RescaleBaseline ComputeBaseline(std::span<const Sentence> pool,
                                std::size_t pair_count,
                                const EmbeddingProvider& provider,
                                const ScoreConfig& cfg, std::uint64_t seed) {
  if (pool.size() < 2) {
    throw Error(ErrorKind::kPoolTooSmall, "baseline pool needs at least 2 sentences");
  }
  if (pair_count == 0) {
    throw Error(ErrorKind::kInvalidInput, "baseline needs at least one pair");
  }
  ScoreConfig raw = cfg;
  raw.baseline.reset();

  const auto records = provider.FetchBatch(pool);
  std::vector<EmbeddedSentence> embedded;
  embedded.reserve(records.size());
  for (const auto& rec : records) embedded.push_back(EmbedRecord(rec, raw.layer));

  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  const std::uint64_t n = pool.size();
  for (std::size_t k = 0; k < pair_count; ++k) {
    CounterRng rng(seed, k);
    const std::uint64_t a = rng.NextBelow(n);
    std::uint64_t b = rng.NextBelow(n - 1);
    if (b >= a) ++b;
    const ScoreTriple t = ScorePair(embedded[a], embedded[b], raw);
    sum_p += t.precision;
    sum_r += t.recall;
    sum_f += t.f1;
  }
  const double count = static_cast<double>(pair_count);
  RescaleBaseline base;
  base.b_precision = sum_p / count;
  base.b_recall = sum_r / count;
  base.b_f1 = sum_f / count;
  base.sample_count = pair_count;
  base.provider = provider.Fingerprint();
  return base;
}

}  // namespace embscore
