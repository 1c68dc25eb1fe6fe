#include "embscore/error.h"

namespace embscore {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kLayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::kInadmissibleExponent: return "InadmissibleExponent";
    case ErrorKind::kMissingSentence: return "MissingSentence";
    case ErrorKind::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotNormalized: return "NotNormalized";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kEmptySentence: return "EmptySentence";
    case ErrorKind::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorKind::kAlreadyRescaled: return "AlreadyRescaled";
    case ErrorKind::kInvalidBaseline: return "InvalidBaseline";
    case ErrorKind::kPoolTooSmall: return "PoolTooSmall";
    case ErrorKind::kEmptyMatrix: return "EmptyMatrix";
    case ErrorKind::kInfeasibleMasses: return "InfeasibleMasses";
    case ErrorKind::kTooShortForOrder: return "TooShortForOrder";
    case ErrorKind::kEmptyBag: return "EmptyBag";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kAllTied: return "AllTied";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kOneClassOnly: return "OneClassOnly";
    case ErrorKind::kUnknownSystem: return "UnknownSystem";
    case ErrorKind::kMissingJudgments: return "MissingJudgments";
    case ErrorKind::kSampleTooLarge: return "SampleTooLarge";
    case ErrorKind::kIncompleteStacks: return "IncompleteStacks";
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace embscore
