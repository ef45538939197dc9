#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/embedding.hpp"
#include "reqdep/eval.hpp"
#include "reqdep/inference.hpp"
#include "reqdep/prediction.hpp"
#include "reqdep/retrieval.hpp"
#include "reqdep/vendor_json.hpp"

namespace reqdep::experiment {

/// A dataset directory holds requirements.csv, annotations.csv and optionally srs.txt.
struct Dataset {
    std::string name;
    Corpus corpus;
    std::vector<AnnotatedPair> annotations;
    std::string content_hash;  // SHA-256 over the three files' contents
};

Dataset load_dataset(const std::filesystem::path& dir);

enum class Mode { Intra, Cross };
std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view s);

struct ExperimentSpec {
    Mode mode = Mode::Intra;
    std::filesystem::path pool_dataset;
    std::filesystem::path test_dataset;  // ignored in intra mode
    double split_ratio = 0.8;
    std::uint64_t seed = 7;
    retrieval::RetrievalConfig retrieval;
    inference::ModelConfig model;
    embedding::EmbeddingProviderConfig embedding;
    bool zero_shot = false;
    bool include_requirements_in_context = true;
    std::string domain_name = "automotive domain";
    std::optional<std::filesystem::path> definitions_path;
};

/// Resolved configuration (plus dataset content hashes) as canonical JSON;
/// secrets and pure execution knobs (API keys, parallelism, audit path) are left out.
nlohmann::json resolved_config(const ExperimentSpec& spec, const Dataset& pool, const Dataset& test);
std::string config_hash(const nlohmann::json& resolved);

struct ExperimentResources {
    inference::ChatProvider* provider = nullptr;  // overrides spec.model when set
    embedding::EmbeddingCache* cache = nullptr;    // overrides spec.embedding.cache_path when set
};

struct ExperimentResult {
    std::vector<Prediction> predictions;
    eval::EvaluationReport report;
    std::string config_hash;
    std::size_t pool_size = 0;
    std::size_t test_size = 0;
};

struct PredictionRun {
    std::vector<Prediction> predictions;  // pair_id order
    std::string config_hash;
    std::optional<std::string> error;     // first stage error; predictions hold what completed
};

/// Embeds what retrieval needs (target requirements, pool pairs, context chunks)
/// and classifies `pairs` against the target corpus. `config` is the resolved
/// configuration whose hash tags every prediction.
PredictionRun predict_pairs(const ExperimentSpec& spec, const Corpus& target, std::span<const AnnotatedPair> pool,
                            std::span<const RequirementPair> pairs, const nlohmann::json& config,
                            const ExperimentResources& resources = {});

/// Writes predictions.csv and responses.jsonl; an aborted run gets a trailing marker row.
void write_predictions(const std::filesystem::path& out_dir, const PredictionRun& run);

/// Intra: stratified split of one dataset (pool = ratio side, test = rest).
/// Cross: pool = all of the pool dataset, test = all of the test dataset.
/// With out_dir set writes predictions.csv, responses.jsonl, report.csv,
/// report.txt, split.csv and config.json. On a stage failure the completed
/// predictions plus an `__ABORTED__` marker row are flushed, then the error rethrown.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& pool, const Dataset& test,
                                const std::optional<std::filesystem::path>& out_dir,
                                const ExperimentResources& resources = {});

/// Loads the datasets named in the spec; cross mode with pool == test throws InvalidSpec.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& out_dir,
                                const ExperimentResources& resources = {});

inline constexpr std::string_view kAbortedMarker = "__ABORTED__";

struct SweepGrid {
    std::vector<std::string> embed_models = {"all-mpnet-base-v2", "bge-m3"};
    std::vector<retrieval::Metric> metrics = {retrieval::Metric::Cosine, retrieval::Metric::Euclidean};
    std::vector<retrieval::Aggregation> aggregations = {retrieval::Aggregation::MaxAvg, retrieval::Aggregation::Avg};
    std::vector<std::size_t> example_ks = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    // RAG phase, run on the best few-shot configuration; empty lists skip it.
    std::vector<std::size_t> chunk_sizes = {500, 1000};
    std::vector<std::size_t> chunk_counts = {2, 6, 10, retrieval::kAllChunks};
    std::size_t chunk_overlap = 200;

    std::size_t fewshot_size() const {
        return embed_models.size() * metrics.size() * aggregations.size() * example_ks.size();
    }
};

struct SweepRow {
    std::string dataset;
    std::string phase;  // "fewshot" or "rag"
    retrieval::RetrievalConfig retrieval;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::string config_hash;
};

struct SweepResult {
    std::vector<SweepRow> fewshot;
    std::vector<SweepRow> rag;
};

/// Runs the grid for one dataset in intra mode (base.pool_dataset supplies it).
/// Rows keep Cartesian order: embed model, metric, aggregation, k.
SweepResult run_sweep(const ExperimentSpec& base, const Dataset& dataset, const SweepGrid& grid,
                      const ExperimentResources& resources = {});

/// sweep_fewshot.csv, sweep_rag.csv, fewshot_series.csv (F1 by k per series) and
/// rag_table.csv (chunk size x chunk count, acc/P/R/F1).
void write_sweep_outputs(const std::filesystem::path& out_dir, const SweepResult& result, const SweepGrid& grid);

std::string format_context_k(std::size_t k);

}  // namespace reqdep::experiment
