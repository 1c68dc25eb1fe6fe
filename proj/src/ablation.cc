#include "embscore/ablation.h"

#include <map>

#include "embscore/error.h"
#include "embscore/harness.h"
#include "embscore/scorer.h"
#include "embscore/stats.h"
#include "embscore/transport.h"

namespace embscore {

using nlohmann::json;

std::string AblationFlags::Name() const {
  std::string name;
  const auto add = [&](std::string_view part) {
    if (!name.empty()) name += '+';
    name += part;
  };
  if (idf) add(IdfVariantName(*idf));
  if (sep) add("SEP");
  if (rm) add("RM");
  if (pmeans) add("PMEANS");
  return name.empty() ? "vanilla" : name;
}

AblationFlags AblationFlags::Parse(std::string_view name) {
  AblationFlags f;
  if (name == "vanilla") return f;
  std::size_t start = 0;
  while (start <= name.size()) {
    auto end = name.find('+', start);
    if (end == std::string_view::npos) end = name.size();
    const auto part = name.substr(start, end - start);
    if (part == "IDF-S") {
      f.idf = IdfVariant::kIdfS;
    } else if (part == "IDF-L") {
      f.idf = IdfVariant::kIdfL;
    } else if (part == "SEP") {
      f.sep = true;
    } else if (part == "RM") {
      f.rm = true;
    } else if (part == "PMEANS") {
      f.pmeans = true;
    } else {
      throw Error(ErrorKind::kInvalidInput,
                  "unknown ablation flag '" + std::string(part) + "'");
    }
    start = end + 1;
  }
  if (f.sep && !f.idf) f.idf = IdfVariant::kIdfS;
  return f;
}

namespace {

json CorrelationEntry(const std::vector<double>& metric, const std::vector<double>& human) {
  try {
    return Pearson(metric, human);
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

}  // namespace

json CompareMatching(const SegmentDataset& ds, const EmbeddingProvider& provider,
                     std::span<const AblationFlags> flag_sets,
                     const AblationSetup& setup) {
  const EmbeddedDataset data = FetchDataset(ds, provider);
  std::vector<TokenSequence> ref_tokens, cand_tokens;
  for (const auto& [id, text] : ds.references) {
    ref_tokens.push_back(data.at(ReferenceKey(id)).tokens);
  }
  for (const auto& [system, outputs] : ds.systems) {
    for (const auto& [id, text] : outputs) {
      cand_tokens.push_back(data.at(CandidateKey(system, id)).tokens);
    }
  }

  json report = json::object();
  for (const auto& flags : flag_sets) {
    ScoreConfig cfg;
    cfg.layer = flags.pmeans ? setup.pmeans_layer : setup.layer;
    if (flags.rm) {
      cfg.filter.punctuation = true;
      cfg.filter.continuation = true;
    }
    if (flags.idf) {
      std::span<const TokenSequence> corpus = ref_tokens;
      if (*flags.idf == IdfVariant::kIdfL) {
        if (setup.large_corpus.empty()) {
          throw Error(ErrorKind::kEmptyCorpus, "IDF-L needs a larger reference corpus");
        }
        corpus = setup.large_corpus;
      }
      auto ref_table = std::make_shared<const IdfTable>(BuildIdf(corpus));
      cfg.idf = IdfPair{ref_table, ref_table};
      if (flags.sep) {
        cfg.idf->candidate = std::make_shared<const IdfTable>(BuildIdf(cand_tokens));
      }
    }

    std::map<std::string, EmbeddedSentence> refs;
    for (const auto& [id, text] : ds.references) {
      refs.emplace(id, EmbedRecord(data.at(ReferenceKey(id)), cfg.layer));
    }
    std::vector<double> greedy, wmd1, wmd2, human, human2;
    json segments = json::array();
    for (const auto& [system, outputs] : ds.systems) {
      for (const auto& [id, text] : outputs) {
        const auto h = ds.Human(system, id);
        if (!h) continue;
        const auto cand = EmbedRecord(data.at(CandidateKey(system, id)), cfg.layer);
        const auto& ref = refs.at(id);
        const double f = ScorePair(cand, ref, cfg).f1;
        const double w1 = WmdScore(ref, cand, 1, cfg.idf, cfg.filter);
        greedy.push_back(f);
        wmd1.push_back(w1);
        human.push_back(*h);
        json seg = {{"system", system}, {"id", id}, {"human", *h},
                    {"greedy_F", f}, {"WMD1", w1}};
        try {
          const double w2 = WmdScore(ref, cand, 2, cfg.idf, cfg.filter);
          wmd2.push_back(w2);
          human2.push_back(*h);
          seg["WMD2"] = w2;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kTooShortForOrder) throw;
          seg["WMD2"] = nullptr;
        }
        segments.push_back(std::move(seg));
      }
    }
    json row;
    row["greedy_F"] = CorrelationEntry(greedy, human);
    row["WMD1"] = CorrelationEntry(wmd1, human);
    row["WMD2"] = CorrelationEntry(wmd2, human2);
    row["n"] = {{"greedy_F", human.size()}, {"WMD1", human.size()}, {"WMD2", human2.size()}};
    row["config"] = cfg.Describe();
    row["segments"] = std::move(segments);
    report[flags.Name()] = std::move(row);
  }
  return report;
}

}  // namespace embscore
