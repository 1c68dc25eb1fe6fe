#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "embscore/dataset.h"
#include "embscore/embeddings.h"
#include "embscore/idf.h"
#include "embscore/tokenizer.h"

namespace embscore {

// One row of the greedy-vs-transport ablation, written like "IDF-L+SEP+RM".
// "vanilla" is the empty set. SEP without IDF-S/IDF-L implies IDF-S.
struct AblationFlags {
  std::optional<IdfVariant> idf;  // kIdfS or kIdfL
  bool sep = false;
  bool rm = false;
  bool pmeans = false;

  std::string Name() const;
  static AblationFlags Parse(std::string_view name);
};

struct AblationSetup {
  LayerPolicy layer;         // used without PMEANS
  LayerPolicy pmeans_layer;  // used with PMEANS
  // Reference corpus for IDF-L (already tokenized). Empty if unavailable.
  std::vector<TokenSequence> large_corpus;
};

// For every flag set, Pearson correlation against human judgments of
// greedy F1, WMD1 and WMD2. Correlations that cannot be computed (constant
// scores, no judged segments) are reported as {"error": "..."}; WMD2 skips
// segments with fewer than two tokens and reports its own n.
nlohmann::json CompareMatching(const SegmentDataset& ds,
                               const EmbeddingProvider& provider,
                               std::span<const AblationFlags> flag_sets,
                               const AblationSetup& setup);

}  // namespace embscore
