#include "reqdep/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "reqdep/error.hpp"

namespace reqdep::retrieval {

std::string_view metric_name(Metric m) { return m == Metric::Cosine ? "cosine" : "euclidean"; }
std::string_view aggregation_name(Aggregation a) { return a == Aggregation::MaxAvg ? "max_avg" : "avg"; }

Metric parse_metric(std::string_view s) {
    if (s == "cosine") return Metric::Cosine;
    if (s == "euclidean") return Metric::Euclidean;
    throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(s) + "' (cosine|euclidean)");
}

Aggregation parse_aggregation(std::string_view s) {
    if (s == "max_avg") return Aggregation::MaxAvg;
    if (s == "avg") return Aggregation::Avg;
    throw Error(ErrorCode::InvalidConfig, "unknown aggregation '" + std::string(s) + "' (max_avg|avg)");
}

void RetrievalConfig::validate() const {
    if (chunk_size == 0 || chunk_overlap >= chunk_size) {
        throw Error(ErrorCode::InvalidConfig, "need 0 <= chunk_overlap < chunk_size (got overlap " +
                                                  std::to_string(chunk_overlap) + ", size " +
                                                  std::to_string(chunk_size) + ")");
    }
    if (example_k < 1) throw Error(ErrorCode::InvalidConfig, "example_k must be >= 1");
    if (embed_model.empty()) throw Error(ErrorCode::InvalidConfig, "embed_model is empty");
}

const std::vector<ScoredExample>& ExampleSet::for_label(DependencyLabel label) const {
    static const std::vector<ScoredExample> kEmpty;
    auto it = by_label.find(label);
    return it == by_label.end() ? kEmpty : it->second;
}

std::size_t ExampleSet::total() const {
    std::size_t n = 0;
    for (const auto& [label, list] : by_label) n += list.size();
    return n;
}

std::vector<Chunk> chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size) {
        throw Error(ErrorCode::InvalidConfig, "need 0 <= overlap < chunk_size");
    }
    // Byte offset of every code point, plus the end sentinel.
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) offsets.push_back(i);
    }
    const std::size_t length = offsets.size();
    offsets.push_back(text.size());

    std::vector<Chunk> chunks;
    const std::size_t stride = chunk_size - overlap;
    for (std::size_t start = 0; start < length; start += stride) {
        const std::size_t end = std::min(start + chunk_size, length);
        Chunk c;
        c.chunk_id = static_cast<int>(chunks.size());
        c.char_start = start;
        c.char_end = end;
        c.text = std::string(text.substr(offsets[start], offsets[end] - offsets[start]));
        chunks.push_back(std::move(c));
        if (end == length) break;
    }
    return chunks;
}

void embed_chunks(std::vector<Chunk>& chunks, EmbeddingStore& store, embedding::EmbeddingProvider& provider,
                  embedding::EmbeddingCache* cache, std::size_t batch_size) {
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    // Whitespace-only chunks cannot be embedded; they keep no embedding and are skipped.
    std::erase_if(texts, [](const std::string& t) { return trim(t).empty(); });
    store.add(texts, provider, cache, batch_size);
    for (auto& c : chunks) {
        if (store.contains(c.text)) c.embedding = store.at(c.text);
    }
}

double similarity(const EmbeddingVector& u, const EmbeddingVector& v, Metric metric) {
    return metric == Metric::Cosine ? embedding::cosine_similarity(u, v) : embedding::euclidean_similarity(u, v);
}

double aggregate_scores(double s1a, double s1b, double s2a, double s2b, Aggregation aggregation) {
    if (aggregation == Aggregation::MaxAvg) return (std::max(s1a, s1b) + std::max(s2a, s2b)) / 2.0;
    return (s1a + s1b + s2a + s2b) / 4.0;
}

namespace {

void require_model(const EmbeddingStore& store, const RetrievalConfig& config) {
    if (store.model_id() != config.embed_model) {
        throw Error(ErrorCode::ModelMismatch, "requirements embedded with '" + store.model_id() +
                                                  "' but retrieval configured for '" + config.embed_model + "'");
    }
}

}  // namespace

double pair_similarity(const RequirementPair& target, const RequirementPair& candidate, const EmbeddingStore& store,
                       Metric metric, Aggregation aggregation) {
    const auto& r1 = store.at(target.a.text);
    const auto& r2 = store.at(target.b.text);
    const auto& ra = store.at(candidate.a.text);
    const auto& rb = store.at(candidate.b.text);
    return aggregate_scores(similarity(r1, ra, metric), similarity(r1, rb, metric), similarity(r2, ra, metric),
                            similarity(r2, rb, metric), aggregation);
}

std::vector<ScoredChunk> retrieve_context(const RequirementPair& pair, std::span<const Chunk> chunks,
                                          const EmbeddingStore& store, const RetrievalConfig& config) {
    require_model(store, config);
    if (config.context_k == 0 || chunks.empty()) return {};
    const auto& ea = store.at(pair.a.text);
    const auto& eb = store.at(pair.b.text);

    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (const auto& c : chunks) {
        if (!c.embedding) continue;
        if (c.embedding->model_id != config.embed_model) {
            throw Error(ErrorCode::ModelMismatch, "chunk " + std::to_string(c.chunk_id) + " embedded with '" +
                                                      c.embedding->model_id + "'");
        }
        const double s = std::max(similarity(*c.embedding, ea, config.metric), similarity(*c.embedding, eb, config.metric));
        scored.push_back({c, s});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& x, const ScoredChunk& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.chunk.chunk_id < y.chunk.chunk_id;
    });
    if (scored.size() > config.context_k) scored.resize(config.context_k);
    return scored;
}

ExampleSet retrieve_examples(const RequirementPair& target, std::span<const AnnotatedPair> pool,
                             const EmbeddingStore& store, const RetrievalConfig& config) {
    require_model(store, config);
    ExampleSet set;
    for (auto label : kGroundTruthLabels) set.by_label[label];

    std::map<DependencyLabel, std::vector<std::pair<std::size_t, double>>> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& ex = pool[i];
        if (ex.pair.shares_requirement_with(target)) continue;
        const double s = pair_similarity(target, ex.pair, store, config.metric, config.aggregation);
        candidates[ex.label].emplace_back(i, s);
    }
    for (auto& [label, list] : candidates) {
        std::stable_sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
        if (list.size() > config.example_k) list.resize(config.example_k);
        auto& out = set.by_label[label];
        for (const auto& [index, score] : list) out.push_back({pool[index], score});
    }
    return set;
}

}  // namespace reqdep::retrieval
