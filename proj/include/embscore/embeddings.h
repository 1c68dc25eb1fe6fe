#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embscore/matrix.h"
#include "embscore/tokenizer.h"

namespace embscore {

struct EmbeddingMatrix {
  Matrix values;
  bool normalized = false;

  std::size_t rows() const { return values.rows(); }
  std::size_t dim() const { return values.cols(); }
};

// Per-layer matrices of one sentence; layer 0 is the input embedding layer.
struct LayerStack {
  std::vector<EmbeddingMatrix> layers;

  std::size_t size() const { return layers.size(); }
  // Throws DimensionMismatch if layers disagree in shape, InvalidInput if
  // the stack is empty.
  void Validate() const;
};

struct EmbeddingRecord {
  std::string id;
  TokenSequence tokens;
  LayerStack stack;
};

// Divides every row by its Euclidean norm. Rows with norm < 1e-12 raise
// ZeroVector.
EmbeddingMatrix NormalizeRows(const EmbeddingMatrix& m);

EmbeddingMatrix SelectLayer(const LayerStack& stack, std::size_t index);

// Exponent of a power mean: -inf (min), +inf (max), or a positive odd
// integer (1 is the arithmetic mean).
class PowerExponent {
 public:
  enum class Kind { kNegInf, kPosInf, kFinite };

  static PowerExponent NegInf() { return PowerExponent(Kind::kNegInf, 0); }
  static PowerExponent PosInf() { return PowerExponent(Kind::kPosInf, 0); }
  // Throws InadmissibleExponent unless p is a positive odd integer.
  static PowerExponent Finite(int p);
  // Accepts "inf", "+inf", "-inf" or a decimal integer. Anything else
  // (including "2" or "0.5") raises InadmissibleExponent.
  static PowerExponent Parse(std::string_view text);

  Kind kind() const { return kind_; }
  int value() const { return value_; }
  std::string ToString() const;

  friend bool operator==(const PowerExponent&, const PowerExponent&) = default;

 private:
  PowerExponent(Kind kind, int value) : kind_(kind), value_(value) {}
  Kind kind_;
  int value_;
};

// Normalizes each layer's rows, computes the per-exponent elementwise power
// means across layers, concatenates them along the dimension axis and
// renormalizes the result.
EmbeddingMatrix PowerMeanAggregate(const LayerStack& stack,
                                   std::span<const PowerExponent> exponents);

struct LayerPolicy {
  enum class Kind { kSingle, kPowerMean };

  Kind kind = Kind::kSingle;
  // Single: the layer to use; unset means the last layer of the stack.
  std::optional<std::size_t> layer;
  // Power mean: the layers aggregated (empty = all) and the exponents.
  std::vector<std::size_t> layers;
  std::vector<PowerExponent> exponents;

  static LayerPolicy Single(std::optional<std::size_t> layer = std::nullopt);
  static LayerPolicy PowerMean(std::vector<std::size_t> layers,
                               std::vector<PowerExponent> exponents);

  std::string Describe() const;
};

// Resolves the policy against a stack and returns a row-normalized matrix.
EmbeddingMatrix ApplyLayerPolicy(const LayerStack& stack,
                                 const LayerPolicy& policy);

// A sentence as handed to a provider. Static providers tokenize `text`
// unless `tokens` is already set; store-backed providers look up `id`.
struct Sentence {
  std::string id;
  std::string text;
  std::optional<TokenSequence> tokens;
};

struct EmbeddedSentence {
  TokenSequence tokens;
  EmbeddingMatrix matrix;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EmbeddingRecord Fetch(const Sentence& sentence) const = 0;
  // The default implementation fetches one sentence at a time.
  virtual std::vector<EmbeddingRecord> FetchBatch(
      std::span<const Sentence> sentences) const;
  // Stable identity of the provider and its data, embedded in reports.
  virtual std::string Fingerprint() const = 0;
};

EmbeddedSentence Embed(const Sentence& sentence,
                       const EmbeddingProvider& provider,
                       const LayerPolicy& policy);

EmbeddedSentence EmbedRecord(const EmbeddingRecord& record,
                             const LayerPolicy& policy);

// piece -> vector lookup with a single layer.
class StaticTable final : public EmbeddingProvider {
 public:
  enum class UnknownPolicy {
    // Pieces missing from the table use the table's entry for the
    // vocabulary's unknown piece.
    kUnknownVector,
    // Pieces missing from the table get a unit vector whose direction is a
    // pure function of the piece string.
    kHashed,
  };

  StaticTable(std::map<std::string, std::vector<double>> table,
              UnknownPolicy policy,
              std::shared_ptr<const Vocabulary> vocab = nullptr);

  // JSON Lines {"piece": string, "vector": [number...]}. When `vocab` is
  // null a vocabulary of the table's pieces plus "[UNK]" is used.
  static std::unique_ptr<StaticTable> FromFile(
      const std::filesystem::path& path, UnknownPolicy policy,
      std::shared_ptr<const Vocabulary> vocab = nullptr);

  EmbeddingRecord Fetch(const Sentence& sentence) const override;
  std::string Fingerprint() const override;

  LayerStack Lookup(const TokenSequence& tokens) const;
  std::vector<double> Vector(std::string_view piece) const;

  std::size_t dim() const { return dim_; }
  const Vocabulary& vocabulary() const { return *vocab_; }

 private:
  std::map<std::string, std::vector<double>> table_;
  UnknownPolicy policy_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t dim_ = 0;
  std::string fingerprint_;
};

// Deterministic pseudo-random unit vector keyed by `piece`.
std::vector<double> HashedUnitVector(std::string_view piece, std::size_t dim);

class PrecomputedStore final : public EmbeddingProvider {
 public:
  explicit PrecomputedStore(std::vector<EmbeddingRecord> records);

  // JSON Lines {"id", "tokens", "layers"} with layers[l][t][d].
  static std::unique_ptr<PrecomputedStore> FromFile(
      const std::filesystem::path& path);

  EmbeddingRecord Fetch(const Sentence& sentence) const override;
  std::string Fingerprint() const override { return fingerprint_; }

  bool Contains(const std::string& id) const { return records_.contains(id); }
  const EmbeddingRecord* Find(const std::string& id) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::unordered_map<std::string, EmbeddingRecord> records_;
  std::string fingerprint_;
};

struct RemoteOptions {
  std::string endpoint;  // http://host:port/path
  std::chrono::milliseconds timeout{10000};
  std::vector<int> layers;
  int retries = 2;
  std::chrono::milliseconds initial_backoff{100};
};

// Talks to an embedding server: POST {"sentences": [...], "layers": [...]}
// answered by EmbeddingRecord JSON lines. Returned layers are indexed in
// request order.
class RemoteClient final : public EmbeddingProvider {
 public:
  explicit RemoteClient(RemoteOptions options);

  EmbeddingRecord Fetch(const Sentence& sentence) const override;
  std::vector<EmbeddingRecord> FetchBatch(
      std::span<const Sentence> sentences) const override;
  std::string Fingerprint() const override;

 private:
  std::string PostOnce(const std::string& body) const;

  RemoteOptions options_;
  std::string scheme_host_port_;
  std::string path_;
};

// Wire helpers shared by the store, the client and test servers.
EmbeddingRecord ParseEmbeddingRecord(std::string_view json_line);
std::string SerializeEmbeddingRecord(const EmbeddingRecord& record);

}  // namespace embscore
