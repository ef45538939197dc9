#include "reqdep/triage.hpp"

#include <algorithm>
#include <unordered_map>

#include "reqdep/csv.hpp"
#include "reqdep/error.hpp"
#include "reqdep/ingest.hpp"

namespace reqdep::triage {

TriageRanking rank_pairs(const Corpus& corpus, const embedding::EmbeddingStore& store) {
    TriageRanking ranking;
    ranking.model_id = store.model_id();
    for (auto& pair : generate_pairs(corpus)) {
        const auto& a = store.at(pair.a.text);
        const auto& b = store.at(pair.b.text);
        if (a.model_id != store.model_id() || b.model_id != store.model_id()) {
            throw Error(ErrorCode::ModelMismatch, "requirement embedded with a different encoder");
        }
        const double score = embedding::cosine_similarity(a, b);
        ranking.rows.push_back({std::move(pair), score});
    }
    std::stable_sort(ranking.rows.begin(), ranking.rows.end(),
                     [](const RankedPair& x, const RankedPair& y) { return x.score > y.score; });
    return ranking;
}

TriageRanking rank_pairs(const Corpus& corpus, const embedding::EmbeddingProviderConfig& config) {
    auto provider = embedding::make_provider(config);
    std::optional<embedding::EmbeddingCache> cache;
    if (config.cache_path) cache.emplace(*config.cache_path);
    embedding::EmbeddingStore store(config.model_id);
    std::vector<std::string> texts;
    for (const auto& r : corpus.requirements()) texts.push_back(r.text);
    store.add(texts, *provider, cache ? &*cache : nullptr, config.batch_size);
    return rank_pairs(corpus, store);
}

void write_annotator_csv(const std::filesystem::path& path, const TriageRanking& ranking, std::size_t top,
                         std::span<const AnnotatedPair> known) {
    std::unordered_map<std::string, DependencyLabel> labels;
    for (const auto& k : known) labels.emplace(k.pair.pair_id, k.label);
    const bool have_known = !known.empty();

    std::vector<csv::Row> rows;
    std::size_t dependent = 0;
    const std::size_t n = std::min(top, ranking.rows.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ranking.rows[i];
        std::string label;
        if (auto it = labels.find(r.pair.pair_id); it != labels.end()) {
            label = label_name(it->second);
            if (it->second != DependencyLabel::NoDependency) ++dependent;
        }
        rows.push_back({std::to_string(i + 1), r.pair.pair_id, r.pair.a.id, r.pair.b.id, ingest::format_double(r.score),
                        r.pair.a.text, r.pair.b.text, label, have_known ? std::to_string(dependent) : std::string()});
    }
    csv::write_table(path,
                     {"rank", "pair_id", "req_a_id", "req_b_id", "score", "req_a_text", "req_b_text", "label",
                      "cumulative_dependent"},
                     rows);
}

}  // namespace reqdep::triage
