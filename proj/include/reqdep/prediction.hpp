#pragma once

#include <string>

#include "reqdep/core.hpp"

namespace reqdep {

inline constexpr double kUnparsedConfidence = -1.0;

struct Prediction {
    std::string pair_id;
    std::string req_a_id;
    std::string req_b_id;
    DependencyLabel label = DependencyLabel::Unparsed;
    std::string rationale;
    double confidence = kUnparsedConfidence;  // [0,5], or -1 when Unparsed
    std::string raw_response;
    std::string model_id;
    std::string config_hash;
    int attempt_count = 0;

    bool operator==(const Prediction&) const = default;
};

}  // namespace reqdep
