#include "embscore/harness.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embscore/error.h"
#include "embscore/ngram.h"
#include "embscore/random.h"
#include "embscore/stats.h"
#include "embscore/tokenizer.h"

namespace embscore {

using nlohmann::json;

double SegmentTable::at(const std::string& system, const std::string& id) const {
  const auto it = scores.find({system, id});
  if (it == scores.end()) {
    throw Error(ErrorKind::kInvalidInput,
                "metric '" + metric + "' has no score for " + system + "/" + id);
  }
  return it->second;
}

SegmentTable ScoreSegments(const SegmentDataset& ds, const MetricUnderTest& metric) {
  SegmentTable table{metric.name, {}};
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      table.scores[{system, id}] = metric.score(system, id);
    }
  }
  return table;
}

MetricUnderTest MetricFromTable(std::string name, std::string fingerprint,
                                SegmentTable table) {
  table.metric = name;
  auto shared = std::make_shared<const SegmentTable>(std::move(table));
  return {std::move(name), std::move(fingerprint),
          [shared](const std::string& system, const std::string& id) {
            return shared->at(system, id);
          }};
}

MetricUnderTest HumanMetric(const SegmentDataset& ds) {
  return {"human", "human",
          [&ds](const std::string& system, const std::string& id) {
            const auto h = ds.Human(system, id);
            if (!h) {
              throw Error(ErrorKind::kMissingJudgments,
                          "no human judgment for " + system + "/" + id);
            }
            return *h;
          }};
}

MetricUnderTest SentBleuMetric(const SegmentDataset& ds) {
  return {"sentbleu", "sentbleu:n=4:smooth=add-one",
          [&ds](const std::string& system, const std::string& id) {
            const auto cand = SplitWhitespace(ds.Candidate(system, id));
            const auto ref = SplitWhitespace(ds.references.at(id));
            return SentenceBleu(cand, ref);
          }};
}

const EmbeddingRecord& EmbeddedDataset::at(const std::string& key) const {
  const auto it = records.find(key);
  if (it == records.end()) {
    throw Error(ErrorKind::kMissingSentence, "no embeddings for '" + key + "'");
  }
  return it->second;
}

EmbeddedDataset FetchDataset(const SegmentDataset& ds,
                             const EmbeddingProvider& provider) {
  std::vector<Sentence> sentences;
  for (const auto& [id, text] : ds.references) {
    sentences.push_back({ReferenceKey(id), text, std::nullopt});
  }
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      sentences.push_back({CandidateKey(system, id), text, std::nullopt});
    }
  }
  auto records = provider.FetchBatch(sentences);
  EmbeddedDataset out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.records.emplace(sentences[i].id, std::move(records[i]));
  }
  return out;
}

GreedyTables ScoreDatasetGreedy(const SegmentDataset& ds,
                                const EmbeddingProvider& provider,
                                const ScoreConfig& cfg) {
  const EmbeddedDataset data = FetchDataset(ds, provider);
  std::map<std::string, EmbeddedSentence> refs;
  for (const auto& [id, text] : ds.references) {
    refs.emplace(id, EmbedRecord(data.at(ReferenceKey(id)), cfg.layer));
  }
  GreedyTables out{{"greedy-P", {}}, {"greedy-R", {}}, {"greedy-F", {}}};
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      const auto cand = EmbedRecord(data.at(CandidateKey(system, id)), cfg.layer);
      const ScoreTriple t = ScorePair(cand, refs.at(id), cfg);
      out.precision.scores[{system, id}] = t.precision;
      out.recall.scores[{system, id}] = t.recall;
      out.f1.scores[{system, id}] = t.f1;
    }
  }
  return out;
}

double SystemScore(const SegmentDataset& ds, const std::string& system,
                   const MetricUnderTest& metric) {
  const auto sys = ds.systems.find(system);
  if (sys == ds.systems.end()) {
    throw Error(ErrorKind::kUnknownSystem, "unknown system '" + system + "'");
  }
  double sum = 0.0;
  for (const auto& [id, text] : ds.references) sum += metric.score(system, id);
  return sum / static_cast<double>(ds.references.size());
}

SegmentCorrelation CorrelateSegments(const SegmentDataset& ds,
                                     const SegmentTable& metric) {
  SegmentCorrelation c;
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      const auto h = ds.Human(system, id);
      if (!h) continue;
      c.metric_scores.push_back(metric.at(system, id));
      c.human_scores.push_back(*h);
    }
  }
  c.n = c.human_scores.size();
  c.kendall = Kendall(c.metric_scores, c.human_scores);
  c.pearson = Pearson(c.metric_scores, c.human_scores);

  const auto names = ds.SystemNames();
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      PairwiseTau pt{names[a], names[b], 0, 0, std::nullopt};
      for (const auto& id : ds.Ids()) {
        const auto ha = ds.Human(names[a], id);
        const auto hb = ds.Human(names[b], id);
        if (!ha || !hb || *ha == *hb) continue;
        const double dm = metric.at(names[a], id) - metric.at(names[b], id);
        const double dh = *ha - *hb;
        if ((dm > 0 && dh > 0) || (dm < 0 && dh < 0)) {
          ++pt.concordant;
        } else {
          ++pt.discordant;
        }
      }
      const std::size_t total = pt.concordant + pt.discordant;
      if (total > 0) {
        pt.tau = (static_cast<double>(pt.concordant) - static_cast<double>(pt.discordant)) /
                 static_cast<double>(total);
      }
      c.per_system_pair.push_back(std::move(pt));
    }
  }
  return c;
}

std::vector<HybridSystem> HybridSupersample(const SegmentDataset& ds,
                                            std::size_t count, std::uint64_t seed) {
  const auto names = ds.SystemNames();
  const auto ids = ds.Ids();
  if (names.empty()) throw Error(ErrorKind::kInvalidInput, "no systems to sample from");
  std::vector<HybridSystem> hybrids;
  hybrids.reserve(count);
  for (std::size_t h = 0; h < count; ++h) {
    CounterRng rng(seed, h);
    HybridSystem hybrid;
    hybrid.assignment.reserve(ids.size());
    double sum = 0.0;
    for (const auto& id : ids) {
      const std::size_t s = rng.NextBelow(names.size());
      const auto judgment = ds.Human(names[s], id);
      if (!judgment) {
        throw Error(ErrorKind::kMissingJudgments,
                    "hybrid drew " + names[s] + "/" + id + " which has no human score");
      }
      sum += *judgment;
      hybrid.assignment.push_back(s);
    }
    hybrid.human_score = sum / static_cast<double>(ids.size());
    hybrids.push_back(std::move(hybrid));
  }
  return hybrids;
}

std::vector<double> HybridMetricScores(const SegmentDataset& ds,
                                       std::span<const HybridSystem> hybrids,
                                       const SegmentTable& metric) {
  const auto names = ds.SystemNames();
  const auto ids = ds.Ids();
  std::vector<double> out;
  out.reserve(hybrids.size());
  for (const auto& h : hybrids) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      sum += metric.at(names.at(h.assignment.at(i)), ids[i]);
    }
    out.push_back(sum / static_cast<double>(ids.size()));
  }
  return out;
}

ModelSelectionReport ModelSelection(std::span<const double> human_scores,
                                    std::span<const double> metric_scores,
                                    std::size_t trials, std::size_t sample_size,
                                    std::uint64_t seed) {
  if (human_scores.size() != metric_scores.size()) {
    throw Error(ErrorKind::kInvalidInput, "human and metric hybrid scores differ in length");
  }
  if (trials == 0) throw Error(ErrorKind::kInvalidInput, "model selection needs trials");
  if (sample_size == 0 || sample_size > human_scores.size()) {
    throw Error(ErrorKind::kSampleTooLarge,
                "sample of " + std::to_string(sample_size) + " from " +
                    std::to_string(human_scores.size()) + " hybrids");
  }
  const std::size_t pool = human_scores.size();
  std::vector<std::size_t> perm(pool);
  std::size_t hits = 0;
  double rr_sum = 0.0;
  double diff_sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, t);
    std::iota(perm.begin(), perm.end(), 0);
    // Partial Fisher-Yates: the first sample_size slots are the sample.
    for (std::size_t i = 0; i < sample_size; ++i) {
      const std::size_t j = i + rng.NextBelow(pool - i);
      std::swap(perm[i], perm[j]);
    }
    // Metric ties go to the earliest draw, which is a uniform choice.
    std::size_t metric_top = perm[0];
    double human_best = human_scores[perm[0]];
    for (std::size_t i = 1; i < sample_size; ++i) {
      const std::size_t idx = perm[i];
      if (metric_scores[idx] > metric_scores[metric_top]) metric_top = idx;
      human_best = std::max(human_best, human_scores[idx]);
    }
    const double picked = human_scores[metric_top];
    std::size_t rank = 1;
    for (std::size_t i = 0; i < sample_size; ++i) {
      if (human_scores[perm[i]] > picked) ++rank;
    }
    if (rank == 1) ++hits;
    rr_sum += 1.0 / static_cast<double>(rank);
    diff_sum += human_best - picked;
  }
  const double n = static_cast<double>(trials);
  return {static_cast<double>(hits) / n, rr_sum / n, diff_sum / n, trials, sample_size};
}

ModelSelectionReport ModelSelection(const SegmentDataset& ds,
                                    std::span<const HybridSystem> hybrids,
                                    const SegmentTable& metric, std::size_t trials,
                                    std::size_t sample_size, std::uint64_t seed) {
  std::vector<double> human;
  human.reserve(hybrids.size());
  for (const auto& h : hybrids) human.push_back(h.human_score);
  const auto scores = HybridMetricScores(ds, hybrids, metric);
  return ModelSelection(human, scores, trials, sample_size, seed);
}

LayerSweepResult LayerSweep(const SegmentDataset& ds, const PrecomputedStore& store,
                            std::size_t first_layer, std::size_t last_layer,
                            const ScoreConfig& cfg) {
  if (first_layer > last_layer) {
    throw Error(ErrorKind::kInvalidInput, "empty layer range");
  }
  const auto record = [&](const std::string& key) -> const EmbeddingRecord& {
    const auto* rec = store.Find(key);
    if (!rec) throw Error(ErrorKind::kIncompleteStacks, "store lacks '" + key + "'");
    if (rec->stack.size() <= last_layer) {
      throw Error(ErrorKind::kIncompleteStacks,
                  "'" + key + "' has " + std::to_string(rec->stack.size()) +
                      " layers, sweep needs " + std::to_string(last_layer + 1));
    }
    return *rec;
  };
  LayerSweepResult out;
  double best = -INFINITY;
  for (std::size_t layer = first_layer; layer <= last_layer; ++layer) {
    ScoreConfig layer_cfg = cfg;
    layer_cfg.layer = LayerPolicy::Single(layer);
    std::map<std::string, EmbeddedSentence> refs;
    for (const auto& [id, text] : ds.references) {
      refs.emplace(id, EmbedRecord(record(ReferenceKey(id)), layer_cfg.layer));
    }
    std::vector<double> metric, human;
    for (const auto& [system, outputs] : ds.systems) {
      for (const auto& [id, text] : outputs) {
        const auto h = ds.Human(system, id);
        if (!h) continue;
        const auto cand = EmbedRecord(record(CandidateKey(system, id)), layer_cfg.layer);
        metric.push_back(ScorePair(cand, refs.at(id), layer_cfg).f1);
        human.push_back(*h);
      }
    }
    const double r = Pearson(metric, human);
    out.curve.emplace_back(layer, r);
    if (r > best) {
      best = r;
      out.best_layer = layer;
    }
  }
  return out;
}

double ParaphraseAuc(std::span<const ParaphrasePair> pairs, const PairMetric& metric) {
  std::vector<bool> labels;
  std::vector<double> scores;
  for (const auto& p : pairs) {
    labels.push_back(p.label);
    scores.push_back(metric(p.sentence1, p.sentence2));
  }
  return RocAuc(labels, scores);
}

json WilliamsMatrix(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& metric_scores,
                    std::span<const double> human) {
  json out = json::object();
  out["convention"] = "one-sided p that the row metric's |pearson| exceeds the column's";
  json matrix = json::object();
  std::vector<std::optional<double>> r(names.size());
  for (std::size_t a = 0; a < names.size(); ++a) {
    try {
      r[a] = Pearson(metric_scores[a], human);
    } catch (const Error&) {
    }
  }
  for (std::size_t a = 0; a < names.size(); ++a) {
    json row = json::object();
    for (std::size_t b = 0; b < names.size(); ++b) {
      if (a == b) continue;
      if (!r[a] || !r[b]) {
        row[names[b]] = nullptr;
        continue;
      }
      try {
        const double sign = (*r[a] < 0) != (*r[b] < 0) ? -1.0 : 1.0;
        const double r23 = sign * Pearson(metric_scores[a], metric_scores[b]);
        row[names[b]] =
            WilliamsTest(std::fabs(*r[a]), std::fabs(*r[b]), r23, human.size()).p;
      } catch (const Error&) {
        row[names[b]] = nullptr;
      }
    }
    matrix[names[a]] = std::move(row);
  }
  out["p"] = std::move(matrix);
  return out;
}

json BootstrapMatrix(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& metric_scores,
                     std::span<const double> human, std::size_t iterations,
                     std::uint64_t seed) {
  json out = json::object();
  out["convention"] =
      "fraction of resamples where the row metric's tau is not above the column's";
  out["iterations"] = iterations;
  out["seed"] = seed;
  json matrix = json::object();
  for (std::size_t a = 0; a < names.size(); ++a) {
    json row = json::object();
    for (std::size_t b = 0; b < names.size(); ++b) {
      if (a == b) continue;
      row[names[b]] =
          BootstrapCompare(metric_scores[a], metric_scores[b], human, iterations, seed);
    }
    matrix[names[a]] = std::move(row);
  }
  out["p"] = std::move(matrix);
  return out;
}

json ToJson(const SegmentCorrelation& c) {
  json j;
  j["n"] = c.n;
  j["kendall"] = c.kendall;
  j["pearson"] = c.pearson;
  j["abs_pearson"] = std::fabs(c.pearson);
  json pairs = json::array();
  for (const auto& p : c.per_system_pair) {
    pairs.push_back({{"system_a", p.system_a},
                     {"system_b", p.system_b},
                     {"concordant", p.concordant},
                     {"discordant", p.discordant},
                     {"tau", p.tau ? json(*p.tau) : json(nullptr)}});
  }
  j["per_system_pair"] = std::move(pairs);
  return j;
}

json ToJson(const ModelSelectionReport& r) {
  return {{"hits_at_1", r.hits_at_1},
          {"mrr", r.mrr},
          {"mean_diff", r.mean_diff},
          {"trials", r.trials},
          {"sample_size", r.sample_size}};
}

}  // namespace embscore
