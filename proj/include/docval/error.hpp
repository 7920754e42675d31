#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace docval {

enum class ErrorCode {
    kMissingField,
    kInvalidField,
    kInvalidBBox,
    kOutOfPageBounds,
    kDuplicateRegionIndex,
    kBadRatios,
    kEmptyGroundTruth,
    kEmptyInput,
    kOutOfRange,
    kIdMismatch,
    kOrphanPrediction,
    kMissingPrediction,
    kDuplicateId,
    kInfeasibleLayout,
    kBadConfig,
    kParse,
    kIo,
    kUsage,
};

std::string_view error_code_name(ErrorCode code);

// All recoverable failures surface as docval::Error; the code lets callers
// (mostly the CLI) decide how to react without matching on message text.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string & message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace docval
