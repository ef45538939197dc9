#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/embedding.hpp"

namespace reqdep::triage {

struct RankedPair {
    RequirementPair pair;
    double score = 0.0;
};

struct TriageRanking {
    std::vector<RankedPair> rows;  // cosine descending, ties in pair generation order
    std::string model_id;
};

/// Scores every unique pair by the cosine of its two requirement embeddings.
TriageRanking rank_pairs(const Corpus& corpus, const embedding::EmbeddingStore& store);

/// Embeds the corpus with `config` first.
TriageRanking rank_pairs(const Corpus& corpus, const embedding::EmbeddingProviderConfig& config);

/// Annotator sheet: rank,pair_id,req_a_id,req_b_id,score,req_a_text,req_b_text,label,cumulative_dependent.
/// With partial annotations, known labels are filled in and cumulative_dependent
/// counts labeled dependent pairs seen so far in rank order.
void write_annotator_csv(const std::filesystem::path& path, const TriageRanking& ranking, std::size_t top,
                         std::span<const AnnotatedPair> known = {});

}  // namespace reqdep::triage
