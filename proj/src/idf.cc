#include "embscore/idf.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "embscore/error.h"

namespace embscore {

using nlohmann::json;

IdfTable::IdfTable(std::unordered_map<std::string, double> weights,
                   std::size_t corpus_size, double unseen_weight)
    : weights_(std::move(weights)),
      corpus_size_(corpus_size),
      unseen_weight_(unseen_weight) {
  if (corpus_size_ == 0) throw Error(ErrorKind::kEmptyCorpus, "M = 0");
  if (!(unseen_weight_ >= 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "negative unseen weight");
  }
  for (const auto& [piece, w] : weights_) {
    if (!(w >= 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "negative idf weight for '" + piece + "'");
    }
  }
}

double IdfTable::Weight(std::string_view piece) const {
  const auto it = weights_.find(std::string(piece));
  return it == weights_.end() ? unseen_weight_ : it->second;
}

std::string IdfTable::Serialize() const {
  std::vector<std::pair<std::string, double>> sorted(weights_.begin(), weights_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string out = json{{"corpus_size", corpus_size_},
                         {"unseen_weight", unseen_weight_}}.dump();
  out += '\n';
  for (const auto& [piece, w] : sorted) {
    out += json{{"piece", piece}, {"weight", w}}.dump();
    out += '\n';
  }
  return out;
}

void IdfTable::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << Serialize();
}

IdfTable IdfTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open idf table " + path.string());
  std::string line;
  std::size_t line_no = 0;
  try {
    if (!std::getline(in, line)) {
      throw Error(ErrorKind::kParse, path.string() + ": missing header line");
    }
    ++line_no;
    const json header = json::parse(line);
    const auto m = header.at("corpus_size").get<std::size_t>();
    const auto unseen = header.at("unseen_weight").get<double>();
    std::unordered_map<std::string, double> weights;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      weights.insert_or_assign(j.at("piece").get<std::string>(),
                               j.at("weight").get<double>());
    }
    return IdfTable(std::move(weights), m, unseen);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse,
                path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

IdfTable BuildIdf(std::span<const TokenSequence> references) {
  if (references.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "idf needs at least one reference");
  }
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_set<std::string_view> seen;
  for (const auto& sentence : references) {
    seen.clear();
    for (const auto& piece : sentence.pieces) {
      if (seen.insert(piece).second) ++df[piece];
    }
  }
  const double m = static_cast<double>(references.size());
  std::unordered_map<std::string, double> weights;
  weights.reserve(df.size());
  for (const auto& [piece, count] : df) {
    weights.emplace(piece, std::log((m + 1.0) / (static_cast<double>(count) + 1.0)));
  }
  return IdfTable(std::move(weights), references.size(), std::log(m + 1.0));
}

std::string_view IdfVariantName(IdfVariant v) {
  switch (v) {
    case IdfVariant::kIdfS: return "IDF-S";
    case IdfVariant::kIdfL: return "IDF-L";
    case IdfVariant::kSep: return "SEP";
  }
  return "";
}

IdfVariant ParseIdfVariant(std::string_view name) {
  if (name == "IDF-S" || name == "idf-s") return IdfVariant::kIdfS;
  if (name == "IDF-L" || name == "idf-l") return IdfVariant::kIdfL;
  if (name == "SEP" || name == "sep") return IdfVariant::kSep;
  throw Error(ErrorKind::kInvalidInput, "unknown idf variant '" + std::string(name) + "'");
}

IdfPair BuildIdfVariant(std::span<const TokenSequence> references,
                        std::span<const TokenSequence> candidates,
                        IdfVariant variant) {
  auto ref = std::make_shared<const IdfTable>(BuildIdf(references));
  if (variant != IdfVariant::kSep) return {ref, ref};
  return {ref, std::make_shared<const IdfTable>(BuildIdf(candidates))};
}

}  // namespace embscore
