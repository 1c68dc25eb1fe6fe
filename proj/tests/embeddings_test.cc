#include "embscore/embeddings.h"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace embscore {
namespace {

EmbeddingMatrix Raw(const std::vector<std::vector<double>>& rows) {
  return {Matrix::FromRows(rows), false};
}

LayerStack Stack(std::initializer_list<std::vector<std::vector<double>>> layers) {
  LayerStack s;
  for (const auto& l : layers) s.layers.push_back(Raw(l));
  return s;
}

Matrix RandomMatrix(oracle::Lcg& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.Uniform(-1, 1);
  }
  return m;
}

TEST(NormalizeRowsTest, Examples) {
  const auto n = NormalizeRows(Raw({{3, 4}}));
  EXPECT_TRUE(n.normalized);
  EXPECT_DOUBLE_EQ(n.values(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(n.values(0, 1), 0.8);
  EXPECT_ERROR_KIND(NormalizeRows(Raw({{1, 0}, {0, 0}})), ErrorKind::kZeroVector);
  EXPECT_ERROR_KIND(NormalizeRows(Raw({{1e-13, 0}})), ErrorKind::kZeroVector);
}

TEST(NormalizeRowsTest, IdempotentAndDirectionPreserving) {
  oracle::Lcg rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const EmbeddingMatrix m{RandomMatrix(rng, 1 + rng.Below(6), 1 + rng.Below(9)), false};
    const auto once = NormalizeRows(m);
    const auto twice = NormalizeRows(once);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      EXPECT_NEAR(Norm(once.values.row(r)), 1.0, 1e-12);
      const double cosine = Dot(m.values.row(r), once.values.row(r)) / Norm(m.values.row(r));
      EXPECT_NEAR(cosine, 1.0, 1e-12);
      for (std::size_t c = 0; c < m.dim(); ++c) {
        EXPECT_NEAR(once.values(r, c), twice.values(r, c), 1e-12);
      }
    }
  }
}

TEST(SelectLayerTest, Examples) {
  const auto s = Stack({{{1, 2}}, {{3, 4}}, {{5, 6}}});
  EXPECT_EQ(SelectLayer(s, 0).values, Matrix::FromRows({{1, 2}}));
  EXPECT_EQ(SelectLayer(s, 2).values, Matrix::FromRows({{5, 6}}));
  EXPECT_FALSE(SelectLayer(s, 2).normalized);
  EXPECT_ERROR_KIND(SelectLayer(s, 7), ErrorKind::kLayerOutOfRange);
}

TEST(LayerStackTest, Validate) {
  EXPECT_ERROR_KIND(LayerStack{}.Validate(), ErrorKind::kInvalidInput);
  EXPECT_ERROR_KIND(Stack({{{1, 2}}, {{1, 2, 3}}}).Validate(), ErrorKind::kDimensionMismatch);
  EXPECT_ERROR_KIND(Stack({{{1, 2}}, {{1, 2}, {3, 4}}}).Validate(), ErrorKind::kDimensionMismatch);
}

TEST(PowerExponentTest, Admissibility) {
  EXPECT_EQ(PowerExponent::Parse("inf"), PowerExponent::PosInf());
  EXPECT_EQ(PowerExponent::Parse("+inf"), PowerExponent::PosInf());
  EXPECT_EQ(PowerExponent::Parse("-inf"), PowerExponent::NegInf());
  EXPECT_EQ(PowerExponent::Parse("3").value(), 3);
  EXPECT_EQ(PowerExponent::Parse("1").ToString(), "1");
  EXPECT_EQ(PowerExponent::NegInf().ToString(), "-inf");
  for (const char* bad : {"2", "0", "-1", "0.5", "1.0", "abc", "", "-3"}) {
    EXPECT_ERROR_KIND(PowerExponent::Parse(bad), ErrorKind::kInadmissibleExponent);
  }
  EXPECT_ERROR_KIND(PowerExponent::Finite(4), ErrorKind::kInadmissibleExponent);
}

TEST(PowerMeanTest, IdenticalLayersMeanIsThatLayer) {
  const auto s = Stack({{{3, 4}}, {{3, 4}}});
  const PowerExponent p[] = {PowerExponent::Finite(1)};
  const auto out = PowerMeanAggregate(s, p);
  EXPECT_NEAR(out.values(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(out.values(0, 1), 0.8, 1e-12);
}

TEST(PowerMeanTest, MaxOfOrthogonalRows) {
  const auto s = Stack({{{1, 0}}, {{0, 1}}});
  const PowerExponent p[] = {PowerExponent::PosInf()};
  const auto out = PowerMeanAggregate(s, p);
  EXPECT_NEAR(out.values(0, 0), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out.values(0, 1), 1 / std::sqrt(2.0), 1e-12);
}

TEST(PowerMeanTest, ConcatenatesPerExponent) {
  const auto s = Stack({{{1, 0}}, {{0, 1}}});
  const PowerExponent p[] = {PowerExponent::NegInf(), PowerExponent::PosInf()};
  const auto out = PowerMeanAggregate(s, p);
  ASSERT_EQ(out.dim(), 4u);
  // min = (0,0), max = (1,1) -> (0,0,1,1)/sqrt2.
  EXPECT_NEAR(out.values(0, 0), 0, 1e-12);
  EXPECT_NEAR(out.values(0, 1), 0, 1e-12);
  EXPECT_NEAR(out.values(0, 2), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out.values(0, 3), 1 / std::sqrt(2.0), 1e-12);
}

TEST(PowerMeanTest, OddExponentKeepsSign) {
  // Normalized layers (-1, 0) and (1/2, sqrt3/2): cube mean of the first
  // coordinate is (-1 + 1/8)/2 = -7/16.
  const auto s = Stack({{{-1, 0}}, {{0.5, std::sqrt(3.0) / 2}}});
  const PowerExponent p[] = {PowerExponent::Finite(3)};
  const auto out = PowerMeanAggregate(s, p);
  const double x = -std::cbrt(7.0 / 16);
  const double y = std::cbrt((std::pow(std::sqrt(3.0) / 2, 3)) / 2);
  const double n = std::hypot(x, y);
  EXPECT_NEAR(out.values(0, 0), x / n, 1e-12);
  EXPECT_NEAR(out.values(0, 1), y / n, 1e-12);
}

TEST(PowerMeanTest, EvenExponentRejected) {
  const auto s = Stack({{{1, 0}}});
  EXPECT_ERROR_KIND(PowerMeanAggregate(s, std::vector{PowerExponent::Parse("2")}),
                    ErrorKind::kInadmissibleExponent);
  EXPECT_ERROR_KIND(PowerMeanAggregate(s, std::vector<PowerExponent>{}),
                    ErrorKind::kInadmissibleExponent);
}

TEST(PowerMeanProperty, CopiesOfOneLayer) {
  oracle::Lcg rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto layer = NormalizeRows({RandomMatrix(rng, 1 + rng.Below(5), 1 + rng.Below(8)), false});
    LayerStack s;
    const std::size_t copies = 1 + rng.Below(6);
    for (std::size_t i = 0; i < copies; ++i) s.layers.push_back(layer);
    const PowerExponent p[] = {PowerExponent::Finite(1)};
    const auto out = PowerMeanAggregate(s, p);
    for (std::size_t r = 0; r < layer.rows(); ++r) {
      for (std::size_t c = 0; c < layer.dim(); ++c) {
        EXPECT_NEAR(out.values(r, c), layer.values(r, c), 1e-12);
      }
    }
  }
}

TEST(PowerMeanProperty, InfiniteExponentsAreElementwiseExtremes) {
  oracle::Lcg rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng.Below(4), dim = 1 + rng.Below(6), L = 1 + rng.Below(5);
    LayerStack s;
    for (std::size_t l = 0; l < L; ++l) s.layers.push_back({RandomMatrix(rng, rows, dim), false});
    const PowerExponent p[] = {PowerExponent::PosInf(), PowerExponent::NegInf()};
    const auto out = PowerMeanAggregate(s, p);
    std::vector<EmbeddingMatrix> normalized;
    for (const auto& l : s.layers) normalized.push_back(NormalizeRows(l));
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> expected(2 * dim);
      for (std::size_t d = 0; d < dim; ++d) {
        double hi = -1e300, lo = 1e300;
        for (const auto& l : normalized) {
          hi = std::max(hi, l.values(r, d));
          lo = std::min(lo, l.values(r, d));
        }
        expected[d] = hi;
        expected[dim + d] = lo;
      }
      const double n = Norm(expected);
      for (std::size_t d = 0; d < 2 * dim; ++d) {
        EXPECT_NEAR(out.values(r, d), expected[d] / n, 1e-12);
      }
    }
  }
}

TEST(LayerPolicyTest, SingleDefaultsToLast) {
  const auto s = Stack({{{1, 0}}, {{0, 2}}});
  const auto out = ApplyLayerPolicy(s, LayerPolicy::Single());
  EXPECT_TRUE(out.normalized);
  EXPECT_EQ(out.values, Matrix::FromRows({{0, 1}}));
  EXPECT_EQ(ApplyLayerPolicy(s, LayerPolicy::Single(0)).values, Matrix::FromRows({{1, 0}}));
  EXPECT_EQ(LayerPolicy::Single().Describe(), "layer:last");
  EXPECT_EQ(LayerPolicy::PowerMean({0, 2}, {PowerExponent::NegInf(), PowerExponent::Finite(1)})
                .Describe(),
            "pmeans:0,2:-inf,1");
}

TEST(LayerPolicyTest, PowerMeanSubsetOfLayers) {
  const auto s = Stack({{{1, 0}}, {{5, 5}}, {{0, 1}}});
  const auto out = ApplyLayerPolicy(s, LayerPolicy::PowerMean({0, 2}, {PowerExponent::PosInf()}));
  EXPECT_NEAR(out.values(0, 0), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_ERROR_KIND(ApplyLayerPolicy(s, LayerPolicy::PowerMean({5}, {PowerExponent::PosInf()})),
                    ErrorKind::kLayerOutOfRange);
}

TEST(StaticTableTest, DirectLookup) {
  const StaticTable table({{"cat", {1, 0}}, {"[UNK]", {0, 1}}},
                          StaticTable::UnknownPolicy::kUnknownVector);
  Sentence s{"s", "cat", std::nullopt};
  const auto e = Embed(s, table, LayerPolicy::Single());
  EXPECT_EQ(e.tokens.pieces, std::vector<std::string>{"cat"});
  EXPECT_EQ(e.matrix.values, Matrix::FromRows({{1, 0}}));
  EXPECT_TRUE(e.matrix.normalized);
}

TEST(StaticTableTest, UnknownVectorPolicy) {
  const StaticTable table({{"cat", {1, 0}}, {"[UNK]", {0, 1}}},
                          StaticTable::UnknownPolicy::kUnknownVector);
  const auto e = Embed({"s", "cat dog", std::nullopt}, table, LayerPolicy::Single());
  EXPECT_EQ(e.tokens.pieces, (std::vector<std::string>{"cat", "[UNK]"}));
  EXPECT_EQ(e.matrix.values, Matrix::FromRows({{1, 0}, {0, 1}}));
}

TEST(StaticTableTest, UnknownVectorPolicyNeedsEntry) {
  EXPECT_ERROR_KIND(StaticTable({{"cat", {1, 0}}}, StaticTable::UnknownPolicy::kUnknownVector),
                    ErrorKind::kInvalidInput);
}

TEST(StaticTableTest, HashedPolicyIsDeterministicAndUnit) {
  auto vocab = std::make_shared<Vocabulary>(std::vector<std::string>{"[UNK]", "cat", "dog"});
  const StaticTable table({{"cat", {1, 0, 0}}}, StaticTable::UnknownPolicy::kHashed, vocab);
  const auto dog = table.Vector("dog");
  EXPECT_EQ(dog, HashedUnitVector("dog", 3));
  EXPECT_NEAR(Norm(dog), 1.0, 1e-12);
  EXPECT_NE(table.Vector("dog"), table.Vector("[UNK]"));
  EXPECT_EQ(table.Vector("cat"), (std::vector<double>{1, 0, 0}));
}

TEST(StaticTableTest, PreTokenizedSentenceIsUsedAsIs) {
  const StaticTable table({{"a", {1, 0}}, {"b", {0, 1}}}, StaticTable::UnknownPolicy::kHashed);
  Sentence s{"x", "ignored", TokenSequence::FromPieces({"b", "a"})};
  const auto rec = table.Fetch(s);
  EXPECT_EQ(rec.tokens.pieces, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(rec.stack.layers[0].values, Matrix::FromRows({{0, 1}, {1, 0}}));
}

TEST(StaticTableTest, DimensionMismatch) {
  EXPECT_ERROR_KIND(StaticTable({{"a", {1, 0}}, {"b", {1}}}, StaticTable::UnknownPolicy::kHashed),
                    ErrorKind::kDimensionMismatch);
}

TEST(StaticTableTest, FromFileAndFingerprint) {
  testutil::TempDir dir;
  testutil::WriteFile(dir / "t.jsonl",
                      "{\"piece\": \"cat\", \"vector\": [1, 0]}\n"
                      "{\"piece\": \"[UNK]\", \"vector\": [0, 1]}\n");
  const auto t = StaticTable::FromFile(dir / "t.jsonl", StaticTable::UnknownPolicy::kUnknownVector);
  EXPECT_EQ(t->dim(), 2u);
  EXPECT_EQ(t->Vector("cat"), (std::vector<double>{1, 0}));
  const auto again = StaticTable::FromFile(dir / "t.jsonl", StaticTable::UnknownPolicy::kUnknownVector);
  EXPECT_EQ(t->Fingerprint(), again->Fingerprint());
  const auto hashed = StaticTable::FromFile(dir / "t.jsonl", StaticTable::UnknownPolicy::kHashed);
  EXPECT_NE(t->Fingerprint(), hashed->Fingerprint());
  testutil::WriteFile(dir / "bad.jsonl", "{\"piece\": \"cat\"}\n");
  EXPECT_ERROR_KIND(StaticTable::FromFile(dir / "bad.jsonl", StaticTable::UnknownPolicy::kHashed),
                    ErrorKind::kParse);
  EXPECT_ERROR_KIND(StaticTable::FromFile(dir / "none.jsonl", StaticTable::UnknownPolicy::kHashed),
                    ErrorKind::kIo);
}

EmbeddingRecord Record(std::string id, std::vector<std::string> tokens,
                       std::initializer_list<std::vector<std::vector<double>>> layers) {
  return {std::move(id), TokenSequence::FromPieces(std::move(tokens)), Stack(layers)};
}

TEST(PrecomputedStoreTest, RetrievalAndErrors) {
  const PrecomputedStore store({Record("s1", {"a", "b"}, {{{1, 0}, {0, 1}}, {{3, 4}, {0, 2}}})});
  const auto e = Embed({"s1", "", std::nullopt}, store, LayerPolicy::Single(1));
  EXPECT_NEAR(e.matrix.values(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(e.matrix.values(1, 1), 1.0, 1e-15);
  EXPECT_ERROR_KIND(store.Fetch({"nope", "", std::nullopt}), ErrorKind::kMissingSentence);
  EXPECT_ERROR_KIND(Embed({"s1", "", std::nullopt}, store, LayerPolicy::Single(9)),
                    ErrorKind::kLayerOutOfRange);
}

TEST(PrecomputedStoreTest, DuplicateIds) {
  EXPECT_ERROR_KIND(PrecomputedStore({Record("s", {"a"}, {{{1}}}), Record("s", {"b"}, {{{1}}})}),
                    ErrorKind::kInvalidInput);
}

TEST(PrecomputedStoreTest, FileRoundTrip) {
  testutil::TempDir dir;
  const auto rec = Record("s1", {"a", "##b"}, {{{1, 0.5}, {0.25, 1}}, {{-1, 2}, {3, 4}}});
  testutil::WriteFile(dir / "e.jsonl", SerializeEmbeddingRecord(rec) + "\n\n");
  const auto store = PrecomputedStore::FromFile(dir / "e.jsonl");
  ASSERT_EQ(store->size(), 1u);
  const auto* got = store->Find("s1");
  ASSERT_NE(got, nullptr);
  EXPECT_EQ(got->tokens.pieces, rec.tokens.pieces);
  EXPECT_EQ(got->tokens.is_continuation, (std::vector<bool>{false, true}));
  EXPECT_EQ(got->stack.layers[1].values, rec.stack.layers[1].values);
  EXPECT_EQ(store->Fingerprint().rfind("precomputed:", 0), 0u);
}

TEST(PrecomputedStoreTest, RowCountMustMatchTokens) {
  EXPECT_ERROR_KIND(ParseEmbeddingRecord(R"({"id":"x","tokens":["a"],"layers":[[[1],[2]]]})"),
                    ErrorKind::kDimensionMismatch);
  EXPECT_ERROR_KIND(ParseEmbeddingRecord(R"({"id":"x","tokens":["a"],"layers":[]})"),
                    ErrorKind::kParse);
  EXPECT_ERROR_KIND(ParseEmbeddingRecord("not json"), ErrorKind::kParse);
}

TEST(EmbedProperty, RowsMatchTokensAndAreUnit) {
  const auto world_vocab = std::make_shared<Vocabulary>(
      std::vector<std::string>{"[UNK]", "the", "cat", "##s", "sat"});
  const StaticTable table({{"the", {1, 2, 3}}, {"cat", {-1, 0, 0.5}}},
                          StaticTable::UnknownPolicy::kHashed, world_vocab);
  for (const char* text : {"the cats sat", "", "zebra", "the the the"}) {
    const auto e = Embed({"x", text, std::nullopt}, table, LayerPolicy::Single());
    ASSERT_EQ(e.matrix.rows(), e.tokens.size());
    for (std::size_t r = 0; r < e.matrix.rows(); ++r) {
      EXPECT_NEAR(Norm(e.matrix.values.row(r)), 1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace embscore
