#include "embscore/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "embscore/error.h"

namespace embscore {

namespace {

class TsvReader {
 public:
  TsvReader(const std::filesystem::path& path, std::vector<std::string> header)
      : path_(path), in_(path, std::ios::binary), expected_(std::move(header)) {
    if (!in_) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    std::string line;
    if (!Next(line)) throw Error(ErrorKind::kParse, path.string() + ": empty file");
    const auto cols = SplitTabs(line);
    if (cols != expected_) {
      std::string want;
      for (const auto& c : expected_) want += (want.empty() ? "" : "\\t") + c;
      throw Error(ErrorKind::kParse, path.string() + ": expected header '" + want + "'");
    }
  }

  bool Row(std::vector<std::string>& cols) {
    std::string line;
    while (Next(line)) {
      if (line.empty()) continue;
      cols = SplitTabs(line);
      if (cols.size() != expected_.size()) {
        Fail("expected " + std::to_string(expected_.size()) + " columns, found " +
             std::to_string(cols.size()));
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void Fail(const std::string& msg) const {
    throw Error(ErrorKind::kParse,
                path_.string() + ":" + std::to_string(line_no_) + ": " + msg);
  }

  double Number(const std::string& cell) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
      Fail("not a finite number: '" + cell + "'");
    }
    return v;
  }

 private:
  bool Next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> expected_;
  std::size_t line_no_ = 0;
};

}  // namespace

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::vector<std::string> SegmentDataset::SystemNames() const {
  std::vector<std::string> names;
  for (const auto& [name, outputs] : systems) names.push_back(name);
  return names;
}

std::vector<std::string> SegmentDataset::Ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, text] : references) ids.push_back(id);
  return ids;
}

std::optional<double> SegmentDataset::Human(const std::string& system,
                                            const std::string& id) const {
  const auto it = human_segment.find({system, id});
  if (it == human_segment.end()) return std::nullopt;
  return it->second;
}

const std::string& SegmentDataset::Candidate(const std::string& system,
                                             const std::string& id) const {
  const auto sys = systems.find(system);
  if (sys == systems.end()) {
    throw Error(ErrorKind::kUnknownSystem, "unknown system '" + system + "'");
  }
  const auto seg = sys->second.find(id);
  if (seg == sys->second.end()) {
    throw Error(ErrorKind::kInvalidInput,
                "system '" + system + "' has no output for id '" + id + "'");
  }
  return seg->second;
}

void SegmentDataset::Validate() const {
  if (references.empty()) throw Error(ErrorKind::kInvalidInput, "dataset has no references");
  if (systems.empty()) throw Error(ErrorKind::kInvalidInput, "dataset has no systems");
  std::string gaps;
  std::size_t gap_count = 0;
  for (const auto& [system, outputs] : systems) {
    for (const auto& [id, text] : references) {
      if (!outputs.contains(id)) {
        if (++gap_count <= 20) gaps += " " + system + "/" + id;
      }
    }
    for (const auto& [id, text] : outputs) {
      if (!references.contains(id)) {
        if (++gap_count <= 20) gaps += " " + system + "/" + id + "(no reference)";
      }
    }
  }
  for (const auto& [key, score] : human_segment) {
    const auto sys = systems.find(key.first);
    if (sys == systems.end() || !sys->second.contains(key.second)) {
      if (++gap_count <= 20) gaps += " judgment:" + key.first + "/" + key.second;
    }
  }
  if (human_system) {
    for (const auto& [system, score] : *human_system) {
      if (!systems.contains(system)) {
        if (++gap_count <= 20) gaps += " system-judgment:" + system;
      }
    }
  }
  if (gap_count > 0) {
    throw Error(ErrorKind::kInvalidInput,
                "dataset coverage gaps (" + std::to_string(gap_count) + "):" + gaps);
  }
}

SegmentDataset LoadSegmentTsv(const std::filesystem::path& path) {
  TsvReader reader(path, {"id", "system", "reference", "candidate", "human_score"});
  SegmentDataset ds;
  std::vector<std::string> cols;
  while (reader.Row(cols)) {
    const auto& id = cols[0];
    const auto& system = cols[1];
    if (id.empty() || system.empty()) reader.Fail("empty id or system");
    const auto [ref_it, inserted] = ds.references.emplace(id, cols[2]);
    if (!inserted && ref_it->second != cols[2]) {
      reader.Fail("reference text for id '" + id + "' differs from an earlier row");
    }
    if (!ds.systems[system].emplace(id, cols[3]).second) {
      reader.Fail("duplicate row for system '" + system + "', id '" + id + "'");
    }
    if (!cols[4].empty()) ds.human_segment[{system, id}] = reader.Number(cols[4]);
  }
  ds.Validate();
  return ds;
}

std::map<std::string, double> LoadSystemHumanTsv(const std::filesystem::path& path) {
  TsvReader reader(path, {"system", "human_score"});
  std::map<std::string, double> out;
  std::vector<std::string> cols;
  while (reader.Row(cols)) {
    if (!out.emplace(cols[0], reader.Number(cols[1])).second) {
      reader.Fail("duplicate system '" + cols[0] + "'");
    }
  }
  return out;
}

std::vector<ParaphrasePair> LoadParaphraseTsv(const std::filesystem::path& path) {
  TsvReader reader(path, {"id", "sentence1", "sentence2", "label"});
  std::vector<ParaphrasePair> out;
  std::vector<std::string> cols;
  while (reader.Row(cols)) {
    if (cols[3] != "0" && cols[3] != "1") reader.Fail("label must be 0 or 1");
    out.push_back({cols[0], cols[1], cols[2], cols[3] == "1"});
  }
  return out;
}

std::vector<IdText> LoadIdTextTsv(const std::filesystem::path& path) {
  TsvReader reader(path, {"id", "text"});
  std::vector<IdText> out;
  std::vector<std::string> cols;
  while (reader.Row(cols)) {
    if (cols[0].empty()) reader.Fail("empty id");
    out.push_back({cols[0], cols[1]});
  }
  return out;
}

std::vector<std::string> LoadLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string ReferenceKey(const std::string& id, std::size_t index) {
  return index == 0 ? "ref:" + id : "ref:" + id + "#" + std::to_string(index);
}

std::string CandidateKey(const std::string& system, const std::string& id) {
  return "sys:" + system + ":" + id;
}

}  // namespace embscore
