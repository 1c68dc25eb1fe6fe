#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embscore {

enum class ErrorKind {
  kZeroVector,
  kLayerOutOfRange,
  kInadmissibleExponent,
  kMissingSentence,
  kProviderUnavailable,
  kDimensionMismatch,
  kNotNormalized,
  kEmptyCorpus,
  kEmptySentence,
  kEmptyAfterFilter,
  kAlreadyRescaled,
  kInvalidBaseline,
  kPoolTooSmall,
  kEmptyMatrix,
  kInfeasibleMasses,
  kTooShortForOrder,
  kEmptyBag,
  kZeroVariance,
  kAllTied,
  kDegenerateInput,
  kOneClassOnly,
  kUnknownSystem,
  kMissingJudgments,
  kSampleTooLarge,
  kIncompleteStacks,
  kInvalidInput,
  kParse,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so
// callers (the CLI in particular) can branch on it without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace embscore
