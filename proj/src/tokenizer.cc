#include "embscore/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <utility>

#include "embscore/error.h"

namespace embscore {

namespace unicode {

namespace {

struct Range {
  char32_t lo;
  char32_t hi;
};

constexpr Range kPunctuation[] = {
#include "unicode_punct.inc"
};

}  // namespace

char32_t DecodeUtf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char lead = byte(pos);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return lead;
  }
  if (pos + len > s.size()) {
    ++pos;
    return lead;
  }
  for (std::size_t i = 1; i < len; ++i) {
    if ((byte(pos + i) & 0xC0) != 0x80) {
      ++pos;
      return lead;
    }
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  pos += len;
  return cp;
}

std::size_t CodePointCount(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) DecodeUtf8(s, pos);
  return n;
}

bool IsWhiteSpace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool IsPunctuation(char32_t cp) {
  const auto it = std::upper_bound(
      std::begin(kPunctuation), std::end(kPunctuation), cp,
      [](char32_t value, const Range& r) { return value < r.lo; });
  if (it == std::begin(kPunctuation)) return false;
  return cp <= std::prev(it)->hi;
}

}  // namespace unicode

Vocabulary::Vocabulary(std::vector<std::string> pieces,
                       std::string continuation_prefix,
                       std::string unknown_piece, std::size_t max_word_chars)
    : pieces_(std::move(pieces)),
      prefix_(std::move(continuation_prefix)),
      unknown_(std::move(unknown_piece)),
      max_word_chars_(max_word_chars) {
  if (pieces_.empty()) {
    throw Error(ErrorKind::kInvalidInput, "vocabulary is empty");
  }
  if (prefix_.empty()) {
    throw Error(ErrorKind::kInvalidInput, "continuation prefix is empty");
  }
  if (max_word_chars_ == 0) {
    throw Error(ErrorKind::kInvalidInput, "max_word_chars must be positive");
  }
  ids_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    // Duplicate lines keep the first id.
    ids_.emplace(pieces_[i], static_cast<long>(i));
  }
  if (!Contains(unknown_)) {
    throw Error(ErrorKind::kInvalidInput,
                "unknown piece '" + unknown_ + "' is not in the vocabulary");
  }
}

Vocabulary Vocabulary::FromFile(const std::filesystem::path& path,
                                std::string continuation_prefix,
                                std::string unknown_piece,
                                std::size_t max_word_chars) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open vocabulary " + path.string());
  }
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) pieces.push_back(line);
  return Vocabulary(std::move(pieces), std::move(continuation_prefix),
                    std::move(unknown_piece), max_word_chars);
}

bool Vocabulary::Contains(std::string_view piece) const {
  return ids_.find(std::string(piece)) != ids_.end();
}

long Vocabulary::Id(std::string_view piece) const {
  const auto it = ids_.find(std::string(piece));
  return it == ids_.end() ? -1 : it->second;
}

TokenSequence TokenSequence::FromPieces(std::vector<std::string> pieces,
                                        std::string_view prefix) {
  TokenSequence seq;
  seq.word_index.reserve(pieces.size());
  seq.is_continuation.reserve(pieces.size());
  std::size_t word = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const bool cont = pieces[i].starts_with(prefix);
    if (i > 0 && !cont) ++word;
    seq.word_index.push_back(word);
    seq.is_continuation.push_back(cont);
  }
  seq.pieces = std::move(pieces);
  return seq;
}

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  while (pos < text.size()) {
    const std::size_t here = pos;
    const char32_t cp = unicode::DecodeUtf8(text, pos);
    if (unicode::IsWhiteSpace(cp)) {
      if (word_start != std::string_view::npos) {
        words.emplace_back(text.substr(word_start, here - word_start));
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = here;
    }
  }
  if (word_start != std::string_view::npos) {
    words.emplace_back(text.substr(word_start));
  }
  return words;
}

namespace {

// Greedy longest-match-first segmentation of one word. Returns false when
// some suffix has no matching piece.
bool SegmentWord(std::string_view word, const Vocabulary& vocab,
                 std::vector<std::string>& out) {
  std::vector<std::size_t> bounds;  // byte offset of each code point, + end
  for (std::size_t pos = 0; pos < word.size();) {
    bounds.push_back(pos);
    unicode::DecodeUtf8(word, pos);
  }
  bounds.push_back(word.size());
  const std::size_t n = bounds.size() - 1;

  std::size_t start = 0;
  std::string candidate;
  while (start < n) {
    std::size_t end = n;
    bool found = false;
    while (end > start) {
      candidate.clear();
      if (start > 0) candidate = vocab.continuation_prefix();
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (vocab.Contains(candidate)) {
        found = true;
        break;
      }
      --end;
    }
    if (!found) return false;
    out.push_back(candidate);
    start = end;
  }
  return true;
}

}  // namespace

TokenSequence Tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSequence seq;
  const auto words = SplitWhitespace(text);
  std::vector<std::string> pieces;
  for (std::size_t w = 0; w < words.size(); ++w) {
    pieces.clear();
    if (unicode::CodePointCount(words[w]) > vocab.max_word_chars() ||
        !SegmentWord(words[w], vocab, pieces)) {
      pieces.assign(1, vocab.unknown_piece());
    }
    for (auto& piece : pieces) {
      seq.is_continuation.push_back(
          piece.starts_with(vocab.continuation_prefix()));
      seq.word_index.push_back(w);
      seq.pieces.push_back(std::move(piece));
    }
  }
  return seq;
}

bool IsPunctuationOnly(std::string_view piece) {
  if (piece.empty()) return false;
  for (std::size_t pos = 0; pos < piece.size();) {
    if (!unicode::IsPunctuation(unicode::DecodeUtf8(piece, pos))) return false;
  }
  return true;
}

bool IsFiltered(std::string_view piece, const FilterPolicy& policy) {
  const bool cont = !policy.continuation_prefix.empty() &&
                    piece.starts_with(policy.continuation_prefix);
  if (policy.continuation && cont) return true;
  if (policy.punctuation) {
    const auto body =
        cont ? piece.substr(policy.continuation_prefix.size()) : piece;
    if (IsPunctuationOnly(body)) return true;
  }
  return false;
}

}  // namespace embscore
