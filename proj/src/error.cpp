#include "reqdep/error.hpp"

namespace reqdep {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::UnknownRequirementId: return "UnknownRequirementId";
        case ErrorCode::DuplicatePair: return "DuplicatePair";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ModelMismatch: return "ModelMismatch";
        case ErrorCode::MissingDefinition: return "MissingDefinition";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
        case ErrorCode::RankTooLarge: return "RankTooLarge";
        case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
        case ErrorCode::DegenerateValidation: return "DegenerateValidation";
        case ErrorCode::PairSetMismatch: return "PairSetMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::ConfigHashMismatch: return "ConfigHashMismatch";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace reqdep
