#include "embscore/dataset.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"

namespace embscore {
namespace {

const char kHeader[] = "id\tsystem\treference\tcandidate\thuman_score\n";

TEST(SegmentTsvTest, LoadsRowsAndOptionalJudgments) {
  testutil::TempDir dir;
  testutil::WriteFile(dir / "seg.tsv", std::string(kHeader) +
                                           "1\tA\tthe cat\ta cat\t0.5\n"
                                           "1\tB\tthe cat\tthe cat\t\n"
                                           "2\tA\ta dog\tdog\t-1e-1\r\n"
                                           "\n"
                                           "2\tB\ta dog\ta dog\t1\n");
  const auto ds = LoadSegmentTsv(dir / "seg.tsv");
  EXPECT_EQ(ds.Ids(), (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(ds.SystemNames(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(ds.Candidate("A", "1"), "a cat");
  EXPECT_EQ(ds.Human("A", "2"), -0.1);
  EXPECT_FALSE(ds.Human("B", "1").has_value());
  EXPECT_EQ(ds.human_segment.size(), 3u);
  EXPECT_ERROR_KIND(ds.Candidate("C", "1"), ErrorKind::kUnknownSystem);
}

TEST(SegmentTsvTest, RejectsMalformedInput) {
  testutil::TempDir dir;
  const auto load = [&](const std::string& body) {
    testutil::WriteFile(dir / "x.tsv", body);
    return LoadSegmentTsv(dir / "x.tsv");
  };
  EXPECT_ERROR_KIND(load("id\tsys\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(load(""), ErrorKind::kParse);
  // A literal tab inside a text cell shows up as an extra column.
  EXPECT_ERROR_KIND(load(std::string(kHeader) + "1\tA\tthe\tcat\ta\tcat\t0.5\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(load(std::string(kHeader) + "1\tA\tr\tc\tabc\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(load(std::string(kHeader) + "1\tA\tr\tc\tnan\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(load(std::string(kHeader) + "1\tA\tr\tc\t1\n1\tA\tr\tc\t1\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(load(std::string(kHeader) + "1\tA\tr\tc\t1\n1\tB\tq\tc\t1\n"), ErrorKind::kParse);
  EXPECT_ERROR_KIND(LoadSegmentTsv(dir / "missing.tsv"), ErrorKind::kIo);
}

TEST(SegmentTsvTest, CoverageGapsAreReported) {
  testutil::TempDir dir;
  testutil::WriteFile(dir / "x.tsv", std::string(kHeader) +
                                         "1\tA\tr1\tc\t1\n"
                                         "2\tA\tr2\tc\t1\n"
                                         "1\tB\tr1\tc\t1\n");
  try {
    LoadSegmentTsv(dir / "x.tsv");
    FAIL() << "expected a coverage error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("B/2"), std::string::npos) << e.what();
  }
}

TEST(DatasetValidateTest, JudgmentsMustReferToSegments) {
  SegmentDataset ds;
  ds.references = {{"1", "r"}};
  ds.systems["A"] = {{"1", "c"}};
  ds.human_segment[{"B", "1"}] = 1.0;
  EXPECT_ERROR_KIND(ds.Validate(), ErrorKind::kInvalidInput);
  ds.human_segment.clear();
  ds.human_system = std::map<std::string, double>{{"Z", 1.0}};
  EXPECT_ERROR_KIND(ds.Validate(), ErrorKind::kInvalidInput);
  ds.human_system = std::map<std::string, double>{{"A", 1.0}};
  ds.Validate();
}

TEST(OtherTsvTest, SystemHumanParaphraseIdText) {
  testutil::TempDir dir;
  testutil::WriteFile(dir / "s.tsv", "system\thuman_score\nA\t0.25\nB\t-1\n");
  const auto s = LoadSystemHumanTsv(dir / "s.tsv");
  EXPECT_EQ(s.at("A"), 0.25);
  EXPECT_EQ(s.at("B"), -1.0);
  testutil::WriteFile(dir / "p.tsv", "id\tsentence1\tsentence2\tlabel\np1\ta b\tb a\t1\np2\tx\ty\t0\n");
  const auto p = LoadParaphraseTsv(dir / "p.tsv");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_TRUE(p[0].label);
  EXPECT_EQ(p[1].sentence2, "y");
  testutil::WriteFile(dir / "bad.tsv", "id\tsentence1\tsentence2\tlabel\np1\ta\tb\tyes\n");
  EXPECT_ERROR_KIND(LoadParaphraseTsv(dir / "bad.tsv"), ErrorKind::kParse);
  testutil::WriteFile(dir / "r.tsv", "id\ttext\n1\tone\n1\tuno\n2\t\n");
  const auto r = LoadIdTextTsv(dir / "r.tsv");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].text, "uno");
  EXPECT_EQ(r[2].text, "");
  testutil::WriteFile(dir / "l.txt", "a b\r\n\nc\n");
  EXPECT_EQ(LoadLines(dir / "l.txt"), (std::vector<std::string>{"a b", "", "c"}));
}

TEST(KeysTest, Format) {
  EXPECT_EQ(ReferenceKey("7"), "ref:7");
  EXPECT_EQ(ReferenceKey("7", 2), "ref:7#2");
  EXPECT_EQ(CandidateKey("sysA", "7"), "sys:sysA:7");
  EXPECT_EQ(SplitTabs("a\t\tb"), (std::vector<std::string>{"a", "", "b"}));
}

}  // namespace
}  // namespace embscore
