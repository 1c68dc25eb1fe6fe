#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace embscore {

// Immutable word-piece inventory. Piece ids are the insertion order, which
// for file-loaded vocabularies is the line number (0-based).
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> pieces,
             std::string continuation_prefix = "##",
             std::string unknown_piece = "[UNK]",
             std::size_t max_word_chars = 100);

  // One piece per line, taken verbatim apart from the trailing newline
  // (a trailing "\r" is kept; it is part of the line).
  static Vocabulary FromFile(const std::filesystem::path& path,
                             std::string continuation_prefix = "##",
                             std::string unknown_piece = "[UNK]",
                             std::size_t max_word_chars = 100);

  bool Contains(std::string_view piece) const;
  // -1 when absent.
  long Id(std::string_view piece) const;

  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& continuation_prefix() const { return prefix_; }
  const std::string& unknown_piece() const { return unknown_; }
  std::size_t max_word_chars() const { return max_word_chars_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, long> ids_;
  std::string prefix_;
  std::string unknown_;
  std::size_t max_word_chars_;
};

struct TokenSequence {
  std::vector<std::string> pieces;
  std::vector<std::size_t> word_index;
  std::vector<bool> is_continuation;

  std::size_t size() const { return pieces.size(); }
  bool empty() const { return pieces.empty(); }

  // Rebuilds word_index / is_continuation from bare pieces: a piece that
  // carries `prefix` continues the previous word, anything else opens one.
  static TokenSequence FromPieces(std::vector<std::string> pieces,
                                  std::string_view prefix = "##");
};

TokenSequence Tokenize(std::string_view text, const Vocabulary& vocab);

// Splits on Unicode White_Space code points. Invalid UTF-8 bytes are kept
// inside words.
std::vector<std::string> SplitWhitespace(std::string_view text);

// Token exclusion classes used by the RM ablation.
struct FilterPolicy {
  bool punctuation = false;
  bool continuation = false;
  std::string continuation_prefix = "##";

  bool empty() const { return !punctuation && !continuation; }
};

bool IsFiltered(std::string_view piece, const FilterPolicy& policy);

// True iff `piece` is non-empty and every code point is in a Unicode P*
// general category.
bool IsPunctuationOnly(std::string_view piece);

namespace unicode {

// Decodes one code point starting at `pos`, advancing it. Malformed
// sequences decode as the single byte value and advance by one.
char32_t DecodeUtf8(std::string_view s, std::size_t& pos);
std::size_t CodePointCount(std::string_view s);
bool IsWhiteSpace(char32_t cp);
bool IsPunctuation(char32_t cp);

}  // namespace unicode

}  // namespace embscore
