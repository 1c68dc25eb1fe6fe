#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace embscore {

// References, system outputs and human judgments for one test set. Ordered
// maps give every driver the same canonical iteration order.
struct SegmentDataset {
  std::map<std::string, std::string> references;                      // id -> text
  std::map<std::string, std::map<std::string, std::string>> systems;  // system -> id -> text
  std::map<std::pair<std::string, std::string>, double> human_segment;  // (system, id)
  std::optional<std::map<std::string, double>> human_system;

  std::vector<std::string> SystemNames() const;
  std::vector<std::string> Ids() const;
  std::optional<double> Human(const std::string& system, const std::string& id) const;
  const std::string& Candidate(const std::string& system, const std::string& id) const;

  // Every system must cover every reference id, and judgments may only
  // refer to known (system, id) pairs. Throws InvalidInput listing the gaps.
  void Validate() const;
};

// TSV with header "id system reference candidate human_score". An empty
// human_score cell means the segment has no judgment. Literal tabs inside
// text cannot be represented and rows with the wrong column count are
// rejected.
SegmentDataset LoadSegmentTsv(const std::filesystem::path& path);

// TSV with header "system human_score".
std::map<std::string, double> LoadSystemHumanTsv(const std::filesystem::path& path);

struct ParaphrasePair {
  std::string id;
  std::string sentence1;  // scored as the reference
  std::string sentence2;
  bool label = false;
};

// TSV with header "id sentence1 sentence2 label", label 0 or 1.
std::vector<ParaphrasePair> LoadParaphraseTsv(const std::filesystem::path& path);

struct IdText {
  std::string id;
  std::string text;
};

// TSV with header "id text". Ids may repeat (several references per id).
std::vector<IdText> LoadIdTextTsv(const std::filesystem::path& path);

// One sentence per line.
std::vector<std::string> LoadLines(const std::filesystem::path& path);

// Keys under which sentences are looked up in precomputed stores.
std::string ReferenceKey(const std::string& id, std::size_t index = 0);
std::string CandidateKey(const std::string& system, const std::string& id);

// Splits a TSV line on tabs.
std::vector<std::string> SplitTabs(const std::string& line);

}  // namespace embscore
