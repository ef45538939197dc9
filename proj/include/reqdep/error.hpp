#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reqdep {

enum class ErrorCode {
    InvalidInput,
    UnknownLabel,
    MissingColumn,
    DuplicateId,
    EmptyText,
    UnknownRequirementId,
    DuplicatePair,
    IoError,
    MalformedRow,
    ProviderUnavailable,
    DimensionMismatch,
    ZeroVector,
    InvalidConfig,
    ModelMismatch,
    MissingDefinition,
    ParseFailure,
    ConfidenceOutOfRange,
    RankTooLarge,
    EmptyVocabulary,
    DegenerateValidation,
    PairSetMismatch,
    LengthMismatch,
    InvalidSpec,
    ConfigHashMismatch,
};

std::string_view error_code_name(ErrorCode code);

// Every domain failure surfaces as this exception; the code identifies the
// contract that was violated and the message names the offending input.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace reqdep
