#include "reqdep/experiment.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "reqdep/csv.hpp"
#include "reqdep/error.hpp"
#include "reqdep/hashing.hpp"
#include "reqdep/ingest.hpp"
#include "reqdep/pipeline.hpp"
#include "reqdep/prompt.hpp"

namespace reqdep::experiment {

namespace fs = std::filesystem;

Dataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "dataset '" + dir.string() + "' is not a directory");
    Dataset ds;
    ds.name = fs::path(dir).lexically_normal().filename().string();
    if (ds.name.empty()) ds.name = fs::path(dir).lexically_normal().parent_path().filename().string();

    const auto req_path = dir / "requirements.csv";
    const auto ann_path = dir / "annotations.csv";
    const auto srs_path = dir / "srs.txt";
    std::string digest_input = ingest::read_text_file(req_path);
    Corpus corpus = ingest::load_requirements(req_path);
    if (fs::exists(srs_path)) {
        auto srs = ingest::load_srs(srs_path);
        digest_input += '\x1e' + srs;
        corpus = corpus.with_srs(std::move(srs));
    }
    if (fs::exists(ann_path)) {
        digest_input += '\x1e' + ingest::read_text_file(ann_path);
        ds.annotations = ingest::load_annotations(ann_path, corpus);
    }
    ds.corpus = std::move(corpus);
    ds.content_hash = sha256_hex(digest_input);
    return ds;
}

std::string_view mode_name(Mode mode) { return mode == Mode::Intra ? "intra" : "cross"; }

Mode parse_mode(std::string_view s) {
    if (s == "intra") return Mode::Intra;
    if (s == "cross") return Mode::Cross;
    throw Error(ErrorCode::InvalidSpec, "unknown mode '" + std::string(s) + "' (intra|cross)");
}

std::string format_context_k(std::size_t k) { return k == retrieval::kAllChunks ? "all" : std::to_string(k); }

namespace {

std::vector<prompt::DependencyDefinition> definitions_for(const ExperimentSpec& spec) {
    return spec.definitions_path ? prompt::load_definitions(*spec.definitions_path) : prompt::default_definitions();
}

nlohmann::json retrieval_json(const retrieval::RetrievalConfig& r) {
    return {{"chunk_size", r.chunk_size},
            {"chunk_overlap", r.chunk_overlap},
            {"context_k", format_context_k(r.context_k)},
            {"example_k", r.example_k},
            {"metric", retrieval::metric_name(r.metric)},
            {"aggregation", retrieval::aggregation_name(r.aggregation)},
            {"embed_model", r.embed_model}};
}

}  // namespace

nlohmann::json resolved_config(const ExperimentSpec& spec, const Dataset& pool, const Dataset& test) {
    nlohmann::json j;
    j["mode"] = mode_name(spec.mode);
    j["split_ratio"] = spec.split_ratio;
    j["seed"] = spec.seed;
    j["zero_shot"] = spec.zero_shot;
    j["include_requirements_in_context"] = spec.include_requirements_in_context;
    j["domain_name"] = spec.domain_name;
    j["retrieval"] = retrieval_json(spec.retrieval);
    j["model"] = {{"provider", inference::provider_kind_name(spec.model.provider_kind)},
                  {"model_id", spec.model.model_id},
                  {"temperature", spec.model.temperature},
                  {"max_retries", spec.model.max_retries}};
    if (spec.model.provider_kind == inference::ProviderKind::RemoteChat) j["model"]["endpoint"] = spec.model.endpoint;
    j["embedding"] = {{"provider", spec.embedding.provider_kind == embedding::ProviderKind::Remote ? "remote" : "stub"},
                      {"batch_size", spec.embedding.batch_size}};
    if (spec.embedding.endpoint) j["embedding"]["endpoint"] = *spec.embedding.endpoint;
    std::string defs;
    for (const auto& d : definitions_for(spec)) defs += std::string(label_name(d.label)) + '\x1f' + d.text + '\x1e';
    j["definitions_sha256"] = sha256_hex(defs);
    j["pool_dataset"] = {{"name", pool.name}, {"content_sha256", pool.content_hash}};
    j["test_dataset"] = {{"name", test.name}, {"content_sha256", test.content_hash}};
    return j;
}

std::string config_hash(const nlohmann::json& resolved) { return sha256_hex(resolved.dump()).substr(0, 16); }

PredictionRun predict_pairs(const ExperimentSpec& spec, const Corpus& target, std::span<const AnnotatedPair> pool,
                            std::span<const RequirementPair> pairs, const nlohmann::json& config,
                            const ExperimentResources& resources) {
    if (!spec.zero_shot) spec.retrieval.validate();
    spec.model.validate();

    auto embed_config = spec.embedding;
    embed_config.model_id = spec.retrieval.embed_model;
    embed_config.validate();
    auto embed_provider = embedding::make_provider(embed_config);
    std::optional<embedding::EmbeddingCache> own_cache;
    embedding::EmbeddingCache* cache = resources.cache;
    if (!cache && embed_config.cache_path) cache = &own_cache.emplace(*embed_config.cache_path);

    embedding::EmbeddingStore store(embed_config.model_id);
    std::vector<retrieval::Chunk> chunks;
    if (!spec.zero_shot) {
        std::vector<std::string> texts;
        for (const auto& r : target.requirements()) texts.push_back(r.text);
        for (const auto& p : pairs) {
            texts.push_back(p.a.text);
            texts.push_back(p.b.text);
        }
        for (const auto& p : pool) {
            texts.push_back(p.pair.a.text);
            texts.push_back(p.pair.b.text);
        }
        store.add(texts, *embed_provider, cache, embed_config.batch_size);
        if (spec.retrieval.context_k > 0) {
            const std::string pool_text = spec.include_requirements_in_context ? pipeline::context_pool_text(target)
                                                                               : target.srs_text().value_or("");
            chunks = retrieval::chunk_text(pool_text, spec.retrieval.chunk_size, spec.retrieval.chunk_overlap);
            retrieval::embed_chunks(chunks, store, *embed_provider, cache, embed_config.batch_size);
        }
    }

    PredictionRun run;
    run.config_hash = config_hash(config);

    pipeline::DetectionInputs inputs;
    inputs.domain_name = spec.domain_name;
    inputs.system_name = target.system_id();
    inputs.chunks = chunks;
    inputs.pool = pool;
    inputs.store = &store;
    inputs.retrieval = spec.retrieval;
    inputs.zero_shot = spec.zero_shot;
    inputs.definitions = definitions_for(spec);
    inputs.model = spec.model;
    inputs.config_hash = run.config_hash;

    std::unique_ptr<inference::ChatProvider> own_provider;
    inference::ChatProvider* provider = resources.provider;
    if (!provider) {
        own_provider = inference::make_chat_provider(spec.model);
        provider = own_provider.get();
    }
    auto detection = pipeline::detect(pairs, inputs, *provider);
    run.predictions = std::move(detection.predictions);
    run.error = std::move(detection.error);
    return run;
}

void write_predictions(const fs::path& out_dir, const PredictionRun& run) {
    fs::create_directories(out_dir);
    auto rows = run.predictions;
    if (run.error) {
        Prediction marker;
        marker.pair_id = std::string(kAbortedMarker);
        marker.rationale = *run.error;
        marker.config_hash = run.config_hash;
        rows.push_back(std::move(marker));
    }
    ingest::save_predictions(out_dir / "predictions.csv", rows);

    std::string responses;
    for (const auto& p : run.predictions) {
        nlohmann::json j{{"pair_id", p.pair_id}, {"attempt_count", p.attempt_count},
                         {"raw_response", p.raw_response},   {"config_hash", run.config_hash}};
        responses += j.dump() + "\n";
    }
    ingest::write_text_file(out_dir / "responses.jsonl", responses);
}

namespace {

void write_config(const fs::path& out_dir, const nlohmann::json& config, const std::string& hash) {
    fs::create_directories(out_dir);
    nlohmann::json cfg = config;
    cfg["config_hash"] = hash;
    ingest::write_text_file(out_dir / "config.json", cfg.dump(2) + "\n");
}

void write_split(const fs::path& out_dir, const eval::Split& split, const std::string& hash) {
    std::vector<csv::Row> rows;
    for (const auto& p : split.pool) rows.push_back({p.pair.pair_id, "pool", std::string(label_name(p.label)), hash});
    for (const auto& p : split.test) rows.push_back({p.pair.pair_id, "test", std::string(label_name(p.label)), hash});
    csv::write_table(out_dir / "split.csv", {"pair_id", "side", "label", "config_hash"}, rows);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& pool, const Dataset& test,
                                const std::optional<fs::path>& out_dir, const ExperimentResources& resources) {
    if (spec.mode == Mode::Cross && pool.content_hash == test.content_hash) {
        throw Error(ErrorCode::InvalidSpec, "cross mode needs a pool dataset different from the test dataset");
    }

    eval::Split split;
    const Corpus* target = nullptr;
    if (spec.mode == Mode::Intra) {
        split = eval::stratified_split(pool.annotations, spec.split_ratio, spec.seed);
        target = &pool.corpus;
    } else {
        split.pool = pool.annotations;
        split.test = test.annotations;
        target = &test.corpus;
    }
    const Dataset& test_ds = spec.mode == Mode::Intra ? pool : test;

    std::vector<RequirementPair> pairs;
    pairs.reserve(split.test.size());
    for (const auto& t : split.test) pairs.push_back(t.pair);

    const auto config = resolved_config(spec, pool, test_ds);
    auto run = predict_pairs(spec, *target, split.pool, pairs, config, resources);

    ExperimentResult result;
    result.config_hash = run.config_hash;
    result.pool_size = split.pool.size();
    result.test_size = split.test.size();

    if (out_dir) {
        write_config(*out_dir, config, run.config_hash);
        write_predictions(*out_dir, run);
        write_split(*out_dir, split, run.config_hash);
    }
    if (run.error) throw Error(ErrorCode::ProviderUnavailable, "experiment aborted: " + *run.error);

    result.predictions = std::move(run.predictions);
    result.report = eval::compute_report(split.test, result.predictions);
    if (out_dir) {
        const std::string title = "Evaluation (" + std::string(mode_name(spec.mode)) + ", pool " + pool.name +
                                  ", test " + test_ds.name + ", config " + result.config_hash + ")";
        ingest::write_text_file(*out_dir / "report.csv", eval::report_csv(result.report, result.config_hash));
        ingest::write_text_file(*out_dir / "report.txt", eval::report_table(result.report, title));
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::optional<fs::path>& out_dir,
                                const ExperimentResources& resources) {
    if (spec.mode == Mode::Cross) {
        std::error_code ec;
        if (spec.test_dataset.empty()) throw Error(ErrorCode::InvalidSpec, "cross mode needs a test dataset");
        if (fs::equivalent(spec.pool_dataset, spec.test_dataset, ec)) {
            throw Error(ErrorCode::InvalidSpec, "cross mode needs a pool dataset different from the test dataset");
        }
    }
    const Dataset pool = load_dataset(spec.pool_dataset);
    if (spec.mode == Mode::Intra) return run_experiment(spec, pool, pool, out_dir, resources);
    const Dataset test = load_dataset(spec.test_dataset);
    return run_experiment(spec, pool, test, out_dir, resources);
}

namespace {

SweepRow make_row(const std::string& dataset, std::string phase, const retrieval::RetrievalConfig& r,
                  const ExperimentResult& res) {
    SweepRow row;
    row.dataset = dataset;
    row.phase = std::move(phase);
    row.retrieval = r;
    row.macro_precision = res.report.macro.precision;
    row.macro_recall = res.report.macro.recall;
    row.macro_f1 = res.report.macro.f1;
    row.accuracy = res.report.accuracy;
    row.config_hash = res.config_hash;
    return row;
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& base, const Dataset& dataset, const SweepGrid& grid,
                      const ExperimentResources& resources) {
    if (grid.fewshot_size() == 0) throw Error(ErrorCode::InvalidSpec, "sweep grid is empty");
    embedding::EmbeddingCache shared_cache;
    ExperimentResources res = resources;
    if (!res.cache) res.cache = &shared_cache;

    ExperimentSpec spec = base;
    spec.mode = Mode::Intra;
    spec.zero_shot = false;

    SweepResult out;
    for (const auto& model : grid.embed_models) {
        for (auto metric : grid.metrics) {
            for (auto aggregation : grid.aggregations) {
                for (auto k : grid.example_ks) {
                    spec.retrieval.embed_model = model;
                    spec.retrieval.metric = metric;
                    spec.retrieval.aggregation = aggregation;
                    spec.retrieval.example_k = k;
                    spec.retrieval.context_k = 0;
                    const auto result = run_experiment(spec, dataset, dataset, std::nullopt, res);
                    out.fewshot.push_back(make_row(dataset.name, "fewshot", spec.retrieval, result));
                }
            }
        }
    }

    if (grid.chunk_sizes.empty() || grid.chunk_counts.empty()) return out;
    const auto best = std::max_element(out.fewshot.begin(), out.fewshot.end(), [](const SweepRow& x, const SweepRow& y) {
        return x.macro_f1 < y.macro_f1;
    });
    spec.retrieval = best->retrieval;
    spec.retrieval.chunk_overlap = grid.chunk_overlap;
    for (auto size : grid.chunk_sizes) {
        for (auto count : grid.chunk_counts) {
            spec.retrieval.chunk_size = size;
            spec.retrieval.context_k = count;
            const auto result = run_experiment(spec, dataset, dataset, std::nullopt, res);
            out.rag.push_back(make_row(dataset.name, "rag", spec.retrieval, result));
        }
    }
    return out;
}

namespace {

const csv::Row kSweepHeader = {"dataset",   "phase",       "embed_model", "metric",         "aggregation",
                               "example_k", "chunk_size",  "chunk_overlap", "context_k",    "accuracy",
                               "macro_precision", "macro_recall", "macro_f1", "config_hash"};

csv::Row sweep_row(const SweepRow& r) {
    const auto f = [](double v) { return ingest::format_double(v); };
    return {r.dataset,
            r.phase,
            r.retrieval.embed_model,
            std::string(retrieval::metric_name(r.retrieval.metric)),
            std::string(retrieval::aggregation_name(r.retrieval.aggregation)),
            std::to_string(r.retrieval.example_k),
            std::to_string(r.retrieval.chunk_size),
            std::to_string(r.retrieval.chunk_overlap),
            format_context_k(r.retrieval.context_k),
            f(r.accuracy),
            f(r.macro_precision),
            f(r.macro_recall),
            f(r.macro_f1),
            r.config_hash};
}

}  // namespace

void write_sweep_outputs(const fs::path& out_dir, const SweepResult& result, const SweepGrid& grid) {
    fs::create_directories(out_dir);
    std::vector<csv::Row> rows;
    for (const auto& r : result.fewshot) rows.push_back(sweep_row(r));
    csv::write_table(out_dir / "sweep_fewshot.csv", kSweepHeader, rows);
    rows.clear();
    for (const auto& r : result.rag) rows.push_back(sweep_row(r));
    csv::write_table(out_dir / "sweep_rag.csv", kSweepHeader, rows);

    // F1 against k, one line per (dataset, encoder, metric, aggregation) series.
    csv::Row header = {"dataset", "embed_model", "metric", "aggregation"};
    for (auto k : grid.example_ks) header.push_back("k" + std::to_string(k));
    std::map<std::vector<std::string>, std::map<std::size_t, double>> series;
    std::vector<std::vector<std::string>> order;
    for (const auto& r : result.fewshot) {
        std::vector<std::string> key = {r.dataset, r.retrieval.embed_model,
                                        std::string(retrieval::metric_name(r.retrieval.metric)),
                                        std::string(retrieval::aggregation_name(r.retrieval.aggregation))};
        if (!series.contains(key)) order.push_back(key);
        series[key][r.retrieval.example_k] = r.macro_f1;
    }
    rows.clear();
    for (const auto& key : order) {
        csv::Row row = key;
        for (auto k : grid.example_ks) {
            auto it = series[key].find(k);
            row.push_back(it == series[key].end() ? "" : ingest::format_double(it->second));
        }
        rows.push_back(std::move(row));
    }
    csv::write_table(out_dir / "fewshot_series.csv", header, rows);

    // Chunk count x chunk size grid with Acc/P/R/F1 rows per dataset.
    header = {"dataset", "measure"};
    for (auto count : grid.chunk_counts) {
        for (auto size : grid.chunk_sizes) header.push_back(format_context_k(count) + "@" + std::to_string(size));
    }
    std::vector<std::string> datasets;
    for (const auto& r : result.rag) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    }
    rows.clear();
    for (const auto& ds : datasets) {
        for (const std::string measure : {"Acc", "P", "R", "F1"}) {
            csv::Row row = {ds, measure};
            for (auto count : grid.chunk_counts) {
                for (auto size : grid.chunk_sizes) {
                    auto it = std::find_if(result.rag.begin(), result.rag.end(), [&](const SweepRow& r) {
                        return r.dataset == ds && r.retrieval.context_k == count && r.retrieval.chunk_size == size;
                    });
                    if (it == result.rag.end()) {
                        row.push_back("");
                        continue;
                    }
                    const double v = measure == "Acc" ? it->accuracy
                                     : measure == "P" ? it->macro_precision
                                     : measure == "R" ? it->macro_recall
                                                      : it->macro_f1;
                    row.push_back(ingest::format_double(v));
                }
            }
            rows.push_back(std::move(row));
        }
    }
    csv::write_table(out_dir / "rag_table.csv", header, rows);
}

}  // namespace reqdep::experiment
