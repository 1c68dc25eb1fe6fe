#include "embscore/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "embscore/error.h"
#include "embscore/random.h"

namespace embscore {

using nlohmann::json;

namespace {

constexpr double kZeroNorm = 1e-12;

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void LayerStack::Validate() const {
  if (layers.empty()) throw Error(ErrorKind::kInvalidInput, "empty layer stack");
  const auto rows = layers.front().rows();
  const auto dim = layers.front().dim();
  for (const auto& layer : layers) {
    if (layer.rows() != rows || layer.dim() != dim) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "layers of one stack differ in shape");
    }
  }
}

EmbeddingMatrix NormalizeRows(const EmbeddingMatrix& m) {
  EmbeddingMatrix out{m.values, true};
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.values.row(r);
    const double norm = Norm(row);
    if (!(norm >= kZeroNorm)) {
      throw Error(ErrorKind::kZeroVector,
                  "row " + std::to_string(r) + " has (near-)zero norm");
    }
    for (double& v : row) v /= norm;
  }
  return out;
}

EmbeddingMatrix SelectLayer(const LayerStack& stack, std::size_t index) {
  if (index >= stack.size()) {
    throw Error(ErrorKind::kLayerOutOfRange,
                "layer " + std::to_string(index) + " requested from a stack of " +
                    std::to_string(stack.size()));
  }
  return stack.layers[index];
}

PowerExponent PowerExponent::Finite(int p) {
  if (p <= 0 || p % 2 == 0) {
    throw Error(ErrorKind::kInadmissibleExponent,
                "power-mean exponent " + std::to_string(p) +
                    " (only odd positive integers and +/-inf are allowed)");
  }
  return PowerExponent(Kind::kFinite, p);
}

PowerExponent PowerExponent::Parse(std::string_view text) {
  if (text == "inf" || text == "+inf") return PosInf();
  if (text == "-inf") return NegInf();
  int p = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, p);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kInadmissibleExponent,
                "cannot use '" + std::string(text) + "' as a power-mean exponent");
  }
  return Finite(p);
}

std::string PowerExponent::ToString() const {
  switch (kind_) {
    case Kind::kNegInf: return "-inf";
    case Kind::kPosInf: return "inf";
    case Kind::kFinite: return std::to_string(value_);
  }
  return {};
}

EmbeddingMatrix PowerMeanAggregate(const LayerStack& stack,
                                   std::span<const PowerExponent> exponents) {
  stack.Validate();
  if (exponents.empty()) {
    throw Error(ErrorKind::kInadmissibleExponent, "no power-mean exponents");
  }
  std::vector<EmbeddingMatrix> normalized;
  normalized.reserve(stack.size());
  for (const auto& layer : stack.layers) normalized.push_back(NormalizeRows(layer));

  const std::size_t rows = normalized.front().rows();
  const std::size_t dim = normalized.front().dim();
  const double layer_count = static_cast<double>(normalized.size());
  EmbeddingMatrix out{Matrix(rows, dim * exponents.size()), false};

  for (std::size_t e = 0; e < exponents.size(); ++e) {
    const PowerExponent& p = exponents[e];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < dim; ++d) {
        double acc = 0.0;
        switch (p.kind()) {
          case PowerExponent::Kind::kPosInf:
            acc = -INFINITY;
            for (const auto& l : normalized) acc = std::max(acc, l.values(r, d));
            break;
          case PowerExponent::Kind::kNegInf:
            acc = INFINITY;
            for (const auto& l : normalized) acc = std::min(acc, l.values(r, d));
            break;
          case PowerExponent::Kind::kFinite: {
            for (const auto& l : normalized) {
              acc += std::pow(l.values(r, d), p.value());
            }
            acc /= layer_count;
            // Odd exponents keep the sign, so the real root is well defined.
            if (p.value() != 1) {
              acc = std::copysign(
                  std::pow(std::fabs(acc), 1.0 / p.value()), acc);
            }
            break;
          }
        }
        out.values(r, e * dim + d) = acc;
      }
    }
  }
  return NormalizeRows(out);
}

LayerPolicy LayerPolicy::Single(std::optional<std::size_t> layer) {
  LayerPolicy p;
  p.kind = Kind::kSingle;
  p.layer = layer;
  return p;
}

LayerPolicy LayerPolicy::PowerMean(std::vector<std::size_t> layers,
                                   std::vector<PowerExponent> exponents) {
  LayerPolicy p;
  p.kind = Kind::kPowerMean;
  p.layers = std::move(layers);
  p.exponents = std::move(exponents);
  return p;
}

std::string LayerPolicy::Describe() const {
  if (kind == Kind::kSingle) {
    return layer ? "layer:" + std::to_string(*layer) : std::string("layer:last");
  }
  std::string s = "pmeans:";
  if (layers.empty()) {
    s += "all";
  } else {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(layers[i]);
    }
  }
  s += ':';
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (i) s += ',';
    s += exponents[i].ToString();
  }
  return s;
}

EmbeddingMatrix ApplyLayerPolicy(const LayerStack& stack,
                                 const LayerPolicy& policy) {
  stack.Validate();
  if (policy.kind == LayerPolicy::Kind::kSingle) {
    const std::size_t index = policy.layer.value_or(stack.size() - 1);
    return NormalizeRows(SelectLayer(stack, index));
  }
  LayerStack chosen;
  if (policy.layers.empty()) {
    chosen = stack;
  } else {
    for (std::size_t index : policy.layers) {
      chosen.layers.push_back(SelectLayer(stack, index));
    }
  }
  return PowerMeanAggregate(chosen, policy.exponents);
}

std::vector<EmbeddingRecord> EmbeddingProvider::FetchBatch(
    std::span<const Sentence> sentences) const {
  std::vector<EmbeddingRecord> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(Fetch(s));
  return out;
}

EmbeddedSentence EmbedRecord(const EmbeddingRecord& record,
                             const LayerPolicy& policy) {
  record.stack.Validate();
  if (record.stack.layers.front().rows() != record.tokens.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "sentence '" + record.id + "' has " +
                    std::to_string(record.tokens.size()) + " tokens but " +
                    std::to_string(record.stack.layers.front().rows()) +
                    " embedding rows");
  }
  return {record.tokens, ApplyLayerPolicy(record.stack, policy)};
}

EmbeddedSentence Embed(const Sentence& sentence,
                       const EmbeddingProvider& provider,
                       const LayerPolicy& policy) {
  return EmbedRecord(provider.Fetch(sentence), policy);
}

// ---------------------------------------------------------------------------
// StaticTable

std::vector<double> HashedUnitVector(std::string_view piece, std::size_t dim) {
  CounterRng rng(Fnv1a64(piece), 0);
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm < kZeroNorm) {
    for (double& x : v) x = rng.NextGaussian();
    norm = Norm(v);
  }
  for (double& x : v) x /= norm;
  return v;
}

StaticTable::StaticTable(std::map<std::string, std::vector<double>> table,
                         UnknownPolicy policy,
                         std::shared_ptr<const Vocabulary> vocab)
    : table_(std::move(table)), policy_(policy), vocab_(std::move(vocab)) {
  if (table_.empty()) throw Error(ErrorKind::kInvalidInput, "empty static table");
  dim_ = table_.begin()->second.size();
  if (dim_ == 0) throw Error(ErrorKind::kInvalidInput, "zero-dimensional vectors");
  for (const auto& [piece, vec] : table_) {
    if (vec.size() != dim_) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "static table vector for '" + piece + "' has dimension " +
                      std::to_string(vec.size()) + ", expected " +
                      std::to_string(dim_));
    }
  }
  if (!vocab_) {
    std::vector<std::string> pieces;
    pieces.reserve(table_.size() + 1);
    for (const auto& entry : table_) pieces.push_back(entry.first);
    if (!table_.contains("[UNK]")) pieces.emplace_back("[UNK]");
    vocab_ = std::make_shared<Vocabulary>(std::move(pieces));
  }
  if (policy_ == UnknownPolicy::kUnknownVector &&
      !table_.contains(vocab_->unknown_piece())) {
    throw Error(ErrorKind::kInvalidInput,
                "unknown-vector policy needs a table entry for '" +
                    vocab_->unknown_piece() + "'");
  }

  std::uint64_t h = Fnv1a64(policy_ == UnknownPolicy::kHashed ? "hashed" : "unk");
  char buf[32];
  for (const auto& [piece, vec] : table_) {
    h = Mix64(h ^ Fnv1a64(piece));
    for (double x : vec) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
      h = Mix64(h ^ Fnv1a64(std::string_view(buf, n)));
    }
  }
  for (const auto& piece : vocab_->pieces()) h = Mix64(h ^ Fnv1a64(piece));
  fingerprint_ = "static:" + Hex64(h) + ":dim=" + std::to_string(dim_) +
                 ":unk=" + (policy_ == UnknownPolicy::kHashed ? "hashed" : "vector");
}

std::unique_ptr<StaticTable> StaticTable::FromFile(
    const std::filesystem::path& path, UnknownPolicy policy,
    std::shared_ptr<const Vocabulary> vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open static table " + path.string());
  std::map<std::string, std::vector<double>> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      auto piece = j.at("piece").get<std::string>();
      auto vec = j.at("vector").get<std::vector<double>>();
      if (!table.emplace(std::move(piece), std::move(vec)).second) {
        throw Error(ErrorKind::kParse, "duplicate piece");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, path.string() + ":" +
                                         std::to_string(line_no) + ": " + e.what());
    }
  }
  return std::make_unique<StaticTable>(std::move(table), policy, std::move(vocab));
}

std::vector<double> StaticTable::Vector(std::string_view piece) const {
  const auto it = table_.find(std::string(piece));
  if (it != table_.end()) return it->second;
  if (policy_ == UnknownPolicy::kHashed) return HashedUnitVector(piece, dim_);
  return table_.at(vocab_->unknown_piece());
}

LayerStack StaticTable::Lookup(const TokenSequence& tokens) const {
  EmbeddingMatrix m{Matrix(tokens.size(), dim_), false};
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto v = Vector(tokens.pieces[t]);
    std::copy(v.begin(), v.end(), m.values.row(t).begin());
  }
  return LayerStack{{std::move(m)}};
}

EmbeddingRecord StaticTable::Fetch(const Sentence& sentence) const {
  TokenSequence tokens =
      sentence.tokens ? *sentence.tokens : Tokenize(sentence.text, *vocab_);
  LayerStack stack = Lookup(tokens);
  return {sentence.id, std::move(tokens), std::move(stack)};
}

std::string StaticTable::Fingerprint() const { return fingerprint_; }

// ---------------------------------------------------------------------------
// PrecomputedStore

EmbeddingRecord ParseEmbeddingRecord(std::string_view json_line) {
  try {
    const json j = json::parse(json_line);
    EmbeddingRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.tokens =
        TokenSequence::FromPieces(j.at("tokens").get<std::vector<std::string>>());
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.empty()) {
      throw Error(ErrorKind::kParse, "record '" + rec.id + "' has no layers");
    }
    for (const auto& layer : layers) {
      const auto rows = layer.get<std::vector<std::vector<double>>>();
      EmbeddingMatrix m{Matrix::FromRows(rows), false};
      if (rows.empty()) m.values = Matrix(0, 0);
      rec.stack.layers.push_back(std::move(m));
    }
    rec.stack.Validate();
    if (rec.stack.layers.front().rows() != rec.tokens.size()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "record '" + rec.id + "' row count differs from token count");
    }
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("embedding record: ") + e.what());
  }
}

std::string SerializeEmbeddingRecord(const EmbeddingRecord& record) {
  json layers = json::array();
  for (const auto& layer : record.stack.layers) {
    json rows = json::array();
    for (std::size_t r = 0; r < layer.rows(); ++r) {
      const auto row = layer.values.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back(std::move(rows));
  }
  json j;
  j["id"] = record.id;
  j["tokens"] = record.tokens.pieces;
  j["layers"] = std::move(layers);
  return j.dump();
}

PrecomputedStore::PrecomputedStore(std::vector<EmbeddingRecord> records) {
  std::uint64_t h = Fnv1a64("precomputed");
  for (auto& rec : records) {
    rec.stack.Validate();
    h = Mix64(h ^ Fnv1a64(rec.id));
    const std::string id = rec.id;
    if (!records_.emplace(id, std::move(rec)).second) {
      throw Error(ErrorKind::kInvalidInput, "duplicate precomputed id '" + id + "'");
    }
  }
  fingerprint_ = "precomputed:" + Hex64(h) + ":n=" + std::to_string(records_.size());
}

std::unique_ptr<PrecomputedStore> PrecomputedStore::FromFile(
    const std::filesystem::path& path) {
  const std::string content = ReadFile(path);
  std::vector<EmbeddingRecord> records;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string_view line(content.data() + start, end - start);
    if (!line.empty()) {
      try {
        records.push_back(ParseEmbeddingRecord(line));
      } catch (const Error& e) {
        throw Error(e.kind(),
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  auto store = std::make_unique<PrecomputedStore>(std::move(records));
  store->fingerprint_ = "precomputed:" + Hex64(Fnv1a64(content)) +
                        ":n=" + std::to_string(store->size());
  return store;
}

const EmbeddingRecord* PrecomputedStore::Find(const std::string& id) const {
  const auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

EmbeddingRecord PrecomputedStore::Fetch(const Sentence& sentence) const {
  const auto* rec = Find(sentence.id);
  if (!rec) {
    throw Error(ErrorKind::kMissingSentence,
                "no precomputed embeddings for id '" + sentence.id + "'");
  }
  return *rec;
}

}  // namespace embscore
