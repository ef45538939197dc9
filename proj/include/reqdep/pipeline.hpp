#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/inference.hpp"
#include "reqdep/prediction.hpp"
#include "reqdep/prompt.hpp"
#include "reqdep/retrieval.hpp"

namespace reqdep::pipeline {

/// Everything the per-pair stages need. All referenced data must outlive
/// the detect() call and is only read.
struct DetectionInputs {
    std::string domain_name = "automotive domain";
    std::string system_name;
    std::span<const retrieval::Chunk> chunks;
    std::span<const AnnotatedPair> pool;
    const embedding::EmbeddingStore* store = nullptr;
    retrieval::RetrievalConfig retrieval;
    bool zero_shot = false;  // no examples, no context
    std::vector<prompt::DependencyDefinition> definitions = prompt::default_definitions();
    inference::ModelConfig model;
    std::string config_hash;
};

prompt::PromptContext build_prompt_context(const RequirementPair& pair, const DetectionInputs& inputs);

struct DetectionResult {
    std::vector<Prediction> predictions;  // sorted by pair_id
    std::optional<std::string> error;     // set when a stage aborted the run
};

/// Classifies every pair with up to model.max_parallel workers. Output order is
/// pair_id order whatever the completion order. On the first stage error no
/// new pairs are started; completed predictions are kept and the error is reported.
DetectionResult detect(std::span<const RequirementPair> pairs, const DetectionInputs& inputs,
                       inference::ChatProvider& provider);

/// Sorts predictions by pair_id (byte order).
void sort_predictions(std::vector<Prediction>& predictions);

/// Builds the context pool text: the SRS followed by the requirements list.
std::string context_pool_text(const Corpus& corpus);

}  // namespace reqdep::pipeline
