#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/embedding.hpp"

namespace reqdep::retrieval {

using embedding::EmbeddingStore;
using embedding::EmbeddingVector;

/// Offsets are in Unicode code points; text = source[char_start, char_end).
struct Chunk {
    int chunk_id = 0;
    std::string text;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::optional<EmbeddingVector> embedding;
};

enum class Metric { Cosine, Euclidean };
enum class Aggregation { MaxAvg, Avg };

std::string_view metric_name(Metric m);
std::string_view aggregation_name(Aggregation a);
Metric parse_metric(std::string_view s);
Aggregation parse_aggregation(std::string_view s);

/// context_k value meaning "every chunk of the document".
inline constexpr std::size_t kAllChunks = std::numeric_limits<std::size_t>::max();

struct RetrievalConfig {
    std::size_t chunk_size = 500;
    std::size_t chunk_overlap = 200;
    std::size_t context_k = 10;
    std::size_t example_k = 4;
    Metric metric = Metric::Euclidean;
    Aggregation aggregation = Aggregation::MaxAvg;
    std::string embed_model = "all-mpnet-base-v2";

    void validate() const;
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
};

struct ScoredExample {
    AnnotatedPair example;
    double score = 0.0;
};

/// One (possibly empty) list per ground-truth label, each score-descending.
struct ExampleSet {
    std::map<DependencyLabel, std::vector<ScoredExample>> by_label;

    const std::vector<ScoredExample>& for_label(DependencyLabel label) const;
    std::size_t total() const;
    bool empty() const { return total() == 0; }
};

std::vector<Chunk> chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap);

/// Attaches embeddings (via the store, which embeds on demand).
void embed_chunks(std::vector<Chunk>& chunks, EmbeddingStore& store, embedding::EmbeddingProvider& provider,
                  embedding::EmbeddingCache* cache, std::size_t batch_size);

double similarity(const EmbeddingVector& u, const EmbeddingVector& v, Metric metric);

/// Combines sim(R1,Ra), sim(R1,Rb), sim(R2,Ra), sim(R2,Rb).
double aggregate_scores(double s1a, double s1b, double s2a, double s2b, Aggregation aggregation);

double pair_similarity(const RequirementPair& target, const RequirementPair& candidate, const EmbeddingStore& store,
                       Metric metric, Aggregation aggregation);

/// Chunk score = max(sim(chunk, a), sim(chunk, b)); top context_k, ties by chunk_id.
std::vector<ScoredChunk> retrieve_context(const RequirementPair& pair, std::span<const Chunk> chunks,
                                          const EmbeddingStore& store, const RetrievalConfig& config);

/// Per label, the example_k pool pairs most similar to target; pool pairs sharing
/// a requirement with the target are never returned; ties keep pool order.
ExampleSet retrieve_examples(const RequirementPair& target, std::span<const AnnotatedPair> pool,
                             const EmbeddingStore& store, const RetrievalConfig& config);

}  // namespace reqdep::retrieval
