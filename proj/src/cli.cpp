#include "reqdep/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "reqdep/baseline_tfidf.hpp"
#include "reqdep/csv.hpp"
#include "reqdep/error.hpp"
#include "reqdep/eval.hpp"
#include "reqdep/experiment.hpp"
#include "reqdep/hashing.hpp"
#include "reqdep/ingest.hpp"
#include "reqdep/pipeline.hpp"
#include "reqdep/retrieval.hpp"
#include "reqdep/triage.hpp"

namespace reqdep::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown by handlers for flag combinations CLI11 cannot express; exit 2 with help.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Returned by handlers that finished but must report failure (Unparsed rows, empty test set).
struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    // inputs
    std::string dataset;
    std::vector<std::string> datasets;
    std::string pool_dataset;
    std::string test_dataset;
    std::string requirements;
    std::string annotations;
    std::string srs;
    std::string pairs_file;
    std::vector<std::string> predictions;
    std::string split_file;
    std::vector<std::string> pair_ids;
    std::string annotator_a;
    std::string annotator_b;
    std::string out = "reqdep-out";
    std::string json_out;  // retrieve-*: written only when given
    bool force = false;
    std::size_t top = 0;

    // experiment
    std::string mode = "intra";
    double split_ratio = 0.8;
    std::uint64_t seed = 7;
    bool zero_shot = false;
    bool no_requirements_context = false;
    std::string domain = "automotive domain";
    std::string definitions;

    // retrieval
    std::size_t chunk_size = 500;
    std::size_t chunk_overlap = 200;
    std::string context_k = "10";
    std::size_t example_k = 4;
    std::string metric = "euclidean";
    std::string aggregation = "max_avg";
    std::string embed_model = "all-mpnet-base-v2";

    // embedding provider
    std::string embed_provider = "stub";
    std::string embed_endpoint;
    std::size_t embed_batch_size = 64;
    std::string embed_cache;

    // chat provider
    std::string provider = "stub";
    std::optional<std::string> model;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    double temperature = 0.0;
    int max_retries = 1;
    std::size_t max_parallel = 4;
    int request_timeout = 120;
    double requests_per_second = 0.0;
    std::string audit;

    // sweep
    std::vector<std::string> embed_models = {"all-mpnet-base-v2", "bge-m3"};
    std::vector<std::string> metrics = {"cosine", "euclidean"};
    std::vector<std::string> aggregations = {"max_avg", "avg"};
    std::vector<std::size_t> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::size_t> chunk_sizes = {500, 1000};
    std::vector<std::string> chunk_counts = {"2", "6", "10", "all"};
    bool no_rag = false;

    // tf-idf baseline
    std::string train;
    std::string test;
    std::string grid = "default";
};

std::size_t parse_count(const std::string& s, const std::string& what) {
    if (s == "all") return retrieval::kAllChunks;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw UsageError(what + ": expected a count or 'all', got '" + s + "'");
    return value;
}

retrieval::Metric metric_flag(const std::string& s) {
    try {
        return retrieval::parse_metric(s);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

retrieval::Aggregation aggregation_flag(const std::string& s) {
    try {
        return retrieval::parse_aggregation(s);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

retrieval::RetrievalConfig retrieval_from(const Flags& f) {
    retrieval::RetrievalConfig r;
    r.chunk_size = f.chunk_size;
    r.chunk_overlap = f.chunk_overlap;
    r.context_k = parse_count(f.context_k, "--context-k");
    r.example_k = f.example_k;
    r.metric = metric_flag(f.metric);
    r.aggregation = aggregation_flag(f.aggregation);
    r.embed_model = f.embed_model;
    return r;
}

embedding::EmbeddingProviderConfig embedding_from(const Flags& f) {
    embedding::EmbeddingProviderConfig e;
    if (f.embed_provider == "remote") {
        e.provider_kind = embedding::ProviderKind::Remote;
    } else if (f.embed_provider != "stub") {
        throw UsageError("--embed-provider must be stub or remote");
    }
    if (!f.embed_endpoint.empty()) e.endpoint = f.embed_endpoint;
    e.model_id = f.embed_model;
    e.batch_size = f.embed_batch_size;
    if (!f.embed_cache.empty()) e.cache_path = f.embed_cache;
    return e;
}

inference::ModelConfig model_from(const Flags& f) {
    inference::ModelConfig m;
    if (f.provider == "remote") {
        m.provider_kind = inference::ProviderKind::RemoteChat;
        m.model_id = f.model.value_or("gpt-4.1");
    } else if (f.provider == "stub") {
        m.provider_kind = inference::ProviderKind::Stub;
        m.model_id = f.model.value_or("stub-nearest-example");
    } else {
        throw UsageError("--provider must be stub or remote");
    }
    m.endpoint = f.endpoint;
    m.temperature = f.temperature;
    m.max_retries = f.max_retries;
    m.max_parallel = f.max_parallel;
    m.request_timeout = std::chrono::seconds(f.request_timeout);
    m.requests_per_second = f.requests_per_second;
    if (!f.audit.empty()) m.audit_path = f.audit;
    return m;
}

experiment::ExperimentSpec spec_from(const Flags& f) {
    experiment::ExperimentSpec spec;
    spec.mode = f.mode == "intra" ? experiment::Mode::Intra
              : f.mode == "cross" ? experiment::Mode::Cross
                                  : throw UsageError("--mode must be intra or cross");
    spec.split_ratio = f.split_ratio;
    spec.seed = f.seed;
    spec.retrieval = retrieval_from(f);
    spec.model = model_from(f);
    spec.embedding = embedding_from(f);
    spec.zero_shot = f.zero_shot;
    spec.include_requirements_in_context = !f.no_requirements_context;
    spec.domain_name = f.domain;
    if (!f.definitions.empty()) spec.definitions_path = f.definitions;
    return spec;
}

void add_retrieval_options(CLI::App* sub, Flags& f) {
    sub->add_option("--chunk-size", f.chunk_size, "Context chunk size in characters")->capture_default_str();
    sub->add_option("--chunk-overlap", f.chunk_overlap, "Overlap between consecutive chunks")->capture_default_str();
    sub->add_option("--context-k", f.context_k, "Context chunks per prompt (a count or 'all')")->capture_default_str();
    sub->add_option("--example-k", f.example_k, "Examples per dependency type")->capture_default_str();
    sub->add_option("--metric", f.metric, "cosine | euclidean")->capture_default_str();
    sub->add_option("--aggregation", f.aggregation, "max_avg | avg")->capture_default_str();
    sub->add_option("--embed-model", f.embed_model, "Sentence encoder id")->capture_default_str();
}

void add_embedding_options(CLI::App* sub, Flags& f) {
    sub->add_option("--embed-provider", f.embed_provider, "stub | remote")->capture_default_str();
    sub->add_option("--embed-endpoint", f.embed_endpoint, "Embedding endpoint URL (remote provider)");
    sub->add_option("--embed-batch-size", f.embed_batch_size, "Texts per embedding request")->capture_default_str();
    sub->add_option("--embed-cache", f.embed_cache, "JSONL embedding cache file");
}

void add_model_options(CLI::App* sub, Flags& f) {
    sub->add_option("--provider", f.provider, "stub | remote")->capture_default_str();
    sub->add_option("--model", f.model, "Chat model id");
    sub->add_option("--endpoint", f.endpoint, "Chat completion endpoint URL")->capture_default_str();
    sub->add_option("--temperature", f.temperature)->capture_default_str();
    sub->add_option("--max-retries", f.max_retries, "Re-asks after an unparseable answer")->capture_default_str();
    sub->add_option("--max-parallel", f.max_parallel, "Concurrent inference requests")->capture_default_str();
    sub->add_option("--request-timeout", f.request_timeout, "Seconds per request")->capture_default_str();
    sub->add_option("--rps", f.requests_per_second, "Request rate cap (0 = none)")->capture_default_str();
    sub->add_option("--audit", f.audit, "Append every prompt/response exchange to this JSONL file");
}

void add_experiment_options(CLI::App* sub, Flags& f) {
    sub->add_option("--split-ratio", f.split_ratio, "Pool share of the stratified split")->capture_default_str();
    sub->add_option("--seed", f.seed, "Split seed")->capture_default_str();
    sub->add_flag("--zero-shot", f.zero_shot, "No examples and no context");
    sub->add_flag("--no-requirements-context", f.no_requirements_context,
                  "Leave the requirements list out of the context pool");
    sub->add_option("--domain", f.domain, "Domain named in the prompt persona")->capture_default_str();
    sub->add_option("--definitions", f.definitions, "JSON file overriding the dependency definitions");
}

Corpus corpus_from_files(const Flags& f) {
    if (!f.dataset.empty()) {
        if (!f.requirements.empty()) throw UsageError("give either --dataset or --requirements, not both");
        return experiment::load_dataset(f.dataset).corpus;
    }
    if (f.requirements.empty()) throw UsageError("--requirements (or --dataset) is required");
    auto corpus = ingest::load_requirements(f.requirements);
    if (!f.srs.empty()) corpus = corpus.with_srs(ingest::load_srs(f.srs));
    return corpus;
}

std::vector<AnnotatedPair> annotations_from_files(const Flags& f, const Corpus& corpus) {
    if (!f.dataset.empty()) return experiment::load_dataset(f.dataset).annotations;
    if (f.annotations.empty()) throw UsageError("--annotations (or --dataset) is required");
    return ingest::load_annotations(f.annotations, corpus);
}

RequirementPair pair_from_ids(const Corpus& corpus, const std::vector<std::string>& ids) {
    if (ids.size() != 2) throw UsageError("--pair takes two requirement ids");
    const Requirement* a = corpus.find(ids[0]);
    const Requirement* b = corpus.find(ids[1]);
    if (!a) throw Error(ErrorCode::UnknownRequirementId, "requirement '" + ids[0] + "' not in corpus");
    if (!b) throw Error(ErrorCode::UnknownRequirementId, "requirement '" + ids[1] + "' not in corpus");
    return make_requirement_pair(*a, *b);
}

std::string seconds_since(std::chrono::steady_clock::time_point start) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2)
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << "s";
    return s.str();
}

void write_pairs_csv(const fs::path& path, std::span<const RequirementPair> pairs) {
    std::vector<csv::Row> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) rows.push_back({p.pair_id, p.a.id, p.b.id});
    csv::write_table(path, {"pair_id", "req_a_id", "req_b_id"}, rows);
}

// ---- subcommands ----------------------------------------------------------

int cmd_ingest_check(const Flags& f, std::ostream& out) {
    const Corpus corpus = corpus_from_files(f);
    out << "requirements: " << corpus.size() << " (system " << corpus.system_id() << ")\n";
    out << "pairs: " << generate_pairs(corpus).size() << "\n";
    if (corpus.srs_text()) out << "srs characters: " << corpus.srs_text()->size() << "\n";
    if (!f.annotations.empty() || (!f.dataset.empty() && fs::exists(fs::path(f.dataset) / "annotations.csv"))) {
        const auto annotations = annotations_from_files(f, corpus);
        std::map<DependencyLabel, std::size_t> counts;
        for (const auto& a : annotations) ++counts[a.label];
        out << "annotated pairs: " << annotations.size() << "\n";
        for (auto label : kGroundTruthLabels) out << "  " << label_name(label) << ": " << counts[label] << "\n";
    }
    for (const auto& p : f.predictions) {
        out << "predictions " << p << ": " << ingest::load_predictions(p).size() << " rows\n";
    }
    return kExitOk;
}

int cmd_pairs(const Flags& f, std::ostream& out) {
    const Corpus corpus = corpus_from_files(f);
    const auto pairs = generate_pairs(corpus);
    write_pairs_csv(fs::path(f.out) / "pairs.csv", pairs);
    out << pairs.size() << "\n";
    return kExitOk;
}

int cmd_triage(const Flags& f, std::ostream& out) {
    const Corpus corpus = corpus_from_files(f);
    std::vector<AnnotatedPair> known;
    if (!f.annotations.empty()) known = ingest::load_annotations(f.annotations, corpus);
    const auto ranking = triage::rank_pairs(corpus, embedding_from(f));
    const fs::path path = fs::path(f.out) / "triage.csv";
    triage::write_annotator_csv(path, ranking, f.top, known);
    const std::size_t written = f.top == 0 ? ranking.rows.size() : std::min(f.top, ranking.rows.size());
    out << "ranked " << ranking.rows.size() << " pairs with " << ranking.model_id << "; wrote " << written
        << " rows to " << path.string() << "\n";
    return kExitOk;
}

struct RetrievalSetup {
    experiment::Dataset dataset;
    std::vector<AnnotatedPair> pool;
    RequirementPair pair;
    retrieval::RetrievalConfig config;
    embedding::EmbeddingStore store;
    std::vector<retrieval::Chunk> chunks;
};

RetrievalSetup prepare_retrieval(const Flags& f, bool with_chunks) {
    if (f.dataset.empty()) throw UsageError("--dataset is required");
    auto ds = experiment::load_dataset(f.dataset);
    auto pool = f.pool_dataset.empty() ? ds.annotations : experiment::load_dataset(f.pool_dataset).annotations;
    auto pair = pair_from_ids(ds.corpus, f.pair_ids);
    auto config = retrieval_from(f);
    config.validate();
    auto embed = embedding_from(f);
    embed.validate();
    auto provider = embedding::make_provider(embed);
    std::optional<embedding::EmbeddingCache> cache;
    if (embed.cache_path) cache.emplace(*embed.cache_path);
    RetrievalSetup setup{std::move(ds), std::move(pool), pair, config, embedding::EmbeddingStore(embed.model_id), {}};

    std::vector<std::string> texts = {pair.a.text, pair.b.text};
    for (const auto& p : setup.pool) {
        texts.push_back(p.pair.a.text);
        texts.push_back(p.pair.b.text);
    }
    setup.store.add(texts, *provider, cache ? &*cache : nullptr, embed.batch_size);
    if (with_chunks) {
        const auto text = f.no_requirements_context ? setup.dataset.corpus.srs_text().value_or("")
                                                    : pipeline::context_pool_text(setup.dataset.corpus);
        setup.chunks = retrieval::chunk_text(text, config.chunk_size, config.chunk_overlap);
        retrieval::embed_chunks(setup.chunks, setup.store, *provider, cache ? &*cache : nullptr, embed.batch_size);
    }
    return setup;
}

nlohmann::json pair_json(const RequirementPair& p) {
    return {{"pair_id", p.pair_id}, {"req_a_id", p.a.id}, {"req_b_id", p.b.id}};
}

void emit_json(const Flags& f, const nlohmann::json& j, const std::string& file, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    out << text;
    if (!f.json_out.empty()) ingest::write_text_file(fs::path(f.json_out) / file, text);
}

int cmd_retrieve_context(const Flags& f, std::ostream& out) {
    auto setup = prepare_retrieval(f, true);
    const auto scored = retrieval::retrieve_context(setup.pair, setup.chunks, setup.store, setup.config);
    nlohmann::json j = pair_json(setup.pair);
    j["embed_model"] = setup.config.embed_model;
    j["metric"] = retrieval::metric_name(setup.config.metric);
    j["chunk_size"] = setup.config.chunk_size;
    j["chunk_overlap"] = setup.config.chunk_overlap;
    j["context_k"] = experiment::format_context_k(setup.config.context_k);
    j["chunk_count"] = setup.chunks.size();
    j["chunks"] = nlohmann::json::array();
    for (const auto& s : scored) {
        j["chunks"].push_back({{"chunk_id", s.chunk.chunk_id},
                               {"score", s.score},
                               {"char_start", s.chunk.char_start},
                               {"char_end", s.chunk.char_end},
                               {"text", s.chunk.text}});
    }
    emit_json(f, j, "context.json", out);
    return kExitOk;
}

int cmd_retrieve_examples(const Flags& f, std::ostream& out) {
    auto setup = prepare_retrieval(f, false);
    const auto examples = retrieval::retrieve_examples(setup.pair, setup.pool, setup.store, setup.config);
    nlohmann::json j = pair_json(setup.pair);
    j["embed_model"] = setup.config.embed_model;
    j["metric"] = retrieval::metric_name(setup.config.metric);
    j["aggregation"] = retrieval::aggregation_name(setup.config.aggregation);
    j["example_k"] = setup.config.example_k;
    j["examples"] = nlohmann::json::object();
    for (auto label : kGroundTruthLabels) {
        auto& list = j["examples"][std::string(label_name(label))];
        list = nlohmann::json::array();
        for (const auto& e : examples.for_label(label)) {
            auto item = pair_json(e.example.pair);
            item["score"] = e.score;
            list.push_back(std::move(item));
        }
    }
    emit_json(f, j, "examples.json", out);
    return kExitOk;
}

std::vector<RequirementPair> read_pair_list(const fs::path& path, const Corpus& corpus) {
    const auto table = csv::read_table(path, {"req_a_id", "req_b_id"});
    std::vector<RequirementPair> pairs;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string row = table.source() + " row " + std::to_string(table.row_number(i));
        const std::string a_id(trim(table.get(i, "req_a_id")));
        const std::string b_id(trim(table.get(i, "req_b_id")));
        auto ia = corpus.index_of(a_id);
        auto ib = corpus.index_of(b_id);
        if (!ia) throw Error(ErrorCode::UnknownRequirementId, row + ": unknown requirement '" + a_id + "'");
        if (!ib) throw Error(ErrorCode::UnknownRequirementId, row + ": unknown requirement '" + b_id + "'");
        if (*ia > *ib) std::swap(ia, ib);
        auto pair = make_requirement_pair(corpus.requirements()[*ia], corpus.requirements()[*ib]);
        if (!seen.insert(pair.pair_id).second) throw Error(ErrorCode::DuplicatePair, row + ": pair listed twice");
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

int cmd_predict(const Flags& f, std::ostream& out) {
    if (f.dataset.empty()) throw UsageError("--dataset is required");
    const auto start = std::chrono::steady_clock::now();
    auto spec = spec_from(f);
    const auto target = experiment::load_dataset(f.dataset);
    const auto pool_ds = f.pool_dataset.empty() ? std::optional<experiment::Dataset>{}
                                                : std::optional(experiment::load_dataset(f.pool_dataset));
    const auto pairs = f.pairs_file.empty() ? generate_pairs(target.corpus) : read_pair_list(f.pairs_file, target.corpus);
    const std::vector<AnnotatedPair> pool = pool_ds ? pool_ds->annotations : std::vector<AnnotatedPair>{};

    auto config = experiment::resolved_config(spec, pool_ds.value_or(experiment::Dataset{}), target);
    config["stage"] = "predict";
    config.erase("split_ratio");
    config.erase("seed");
    config.erase("mode");
    std::string pair_ids;
    for (const auto& p : pairs) pair_ids += p.pair_id + "\n";
    config["pairs_sha256"] = sha256_hex(pair_ids);

    const auto run = experiment::predict_pairs(spec, target.corpus, pool, pairs, config);
    experiment::write_predictions(f.out, run);
    nlohmann::json cfg = config;
    cfg["config_hash"] = run.config_hash;
    ingest::write_text_file(fs::path(f.out) / "config.json", cfg.dump(2) + "\n");
    if (run.error) throw Error(ErrorCode::ProviderUnavailable, "prediction aborted: " + *run.error);

    const auto unparsed = std::count_if(run.predictions.begin(), run.predictions.end(),
                                        [](const Prediction& p) { return p.label == DependencyLabel::Unparsed; });
    out << "predicted " << run.predictions.size() << " pairs (" << unparsed << " unparsed), config " << run.config_hash
        << ", " << seconds_since(start) << "\n";
    if (unparsed > 0) throw DomainFailure(std::to_string(unparsed) + " predictions could not be parsed");
    return kExitOk;
}

int cmd_evaluate(const Flags& f, std::ostream& out) {
    if (f.predictions.empty()) throw UsageError("at least one --predictions file is required");
    const Corpus corpus = corpus_from_files(f);
    auto gt = annotations_from_files(f, corpus);

    std::vector<Prediction> predictions;
    for (const auto& path : f.predictions) {
        auto rows = ingest::load_predictions(path);
        predictions.insert(predictions.end(), rows.begin(), rows.end());
    }
    std::set<std::string> hashes;
    for (const auto& p : predictions) {
        if (p.pair_id == experiment::kAbortedMarker) {
            throw Error(ErrorCode::InvalidInput, "predictions come from an aborted run: " + p.rationale);
        }
        hashes.insert(p.config_hash);
    }
    if (hashes.size() > 1 && !f.force) {
        throw Error(ErrorCode::ConfigHashMismatch,
                    "prediction files carry " + std::to_string(hashes.size()) + " different config hashes (use --force)");
    }

    if (!f.split_file.empty()) {
        const auto table = csv::read_table(f.split_file, {"pair_id", "side"});
        std::set<std::string> test_ids;
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (table.get(i, "side") == "test") test_ids.insert(table.get(i, "pair_id"));
        }
        std::erase_if(gt, [&](const AnnotatedPair& a) { return !test_ids.contains(a.pair.pair_id); });
    }

    const auto report = eval::compute_report(gt, predictions);
    const std::string hash = hashes.size() == 1 ? *hashes.begin() : std::string("mixed");
    ingest::write_text_file(fs::path(f.out) / "report.csv", eval::report_csv(report, hash));
    const auto table = eval::report_table(report, "Evaluation (config " + hash + ")");
    ingest::write_text_file(fs::path(f.out) / "report.txt", table);
    out << table;
    if (report.confusion.total() == 0) throw DomainFailure("no pairs were evaluated");
    if (report.unparsed > 0) throw DomainFailure(std::to_string(report.unparsed) + " predictions are Unparsed");
    return kExitOk;
}

int cmd_run(const Flags& f, std::ostream& out) {
    auto spec = spec_from(f);
    if (spec.mode == experiment::Mode::Intra) {
        if (f.dataset.empty()) throw UsageError("intra mode needs --dataset");
        spec.pool_dataset = f.dataset;
    } else {
        if (f.pool_dataset.empty() || f.test_dataset.empty()) {
            throw UsageError("cross mode needs --pool-dataset and --test-dataset");
        }
        spec.pool_dataset = f.pool_dataset;
        spec.test_dataset = f.test_dataset;
    }
    const auto start = std::chrono::steady_clock::now();
    const auto result = experiment::run_experiment(spec, fs::path(f.out));
    out << eval::report_table(result.report, "Evaluation (" + std::string(experiment::mode_name(spec.mode)) +
                                                 ", config " + result.config_hash + ")");
    out << "pool " << result.pool_size << " pairs, test " << result.test_size << " pairs, " << seconds_since(start)
        << "\n";
    if (result.test_size == 0) throw DomainFailure("the test set is empty");
    if (result.report.unparsed > 0) {
        throw DomainFailure(std::to_string(result.report.unparsed) + " predictions could not be parsed");
    }
    return kExitOk;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
    if (f.datasets.empty()) throw UsageError("at least one --dataset is required");
    auto base = spec_from(f);
    experiment::SweepGrid grid;
    grid.embed_models = f.embed_models;
    grid.metrics.clear();
    for (const auto& m : f.metrics) grid.metrics.push_back(metric_flag(m));
    grid.aggregations.clear();
    for (const auto& a : f.aggregations) grid.aggregations.push_back(aggregation_flag(a));
    grid.example_ks = f.ks;
    grid.chunk_overlap = f.chunk_overlap;
    if (f.no_rag) {
        grid.chunk_sizes.clear();
        grid.chunk_counts.clear();
    } else {
        grid.chunk_sizes = f.chunk_sizes;
        grid.chunk_counts.clear();
        for (const auto& c : f.chunk_counts) grid.chunk_counts.push_back(parse_count(c, "--chunk-counts"));
    }
    if (grid.fewshot_size() == 0) throw UsageError("the sweep grid is empty");

    const auto start = std::chrono::steady_clock::now();
    experiment::SweepResult all;
    for (const auto& dir : f.datasets) {
        const auto ds = experiment::load_dataset(dir);
        auto part = experiment::run_sweep(base, ds, grid);
        all.fewshot.insert(all.fewshot.end(), part.fewshot.begin(), part.fewshot.end());
        all.rag.insert(all.rag.end(), part.rag.begin(), part.rag.end());
    }
    experiment::write_sweep_outputs(f.out, all, grid);
    out << "few-shot rows: " << all.fewshot.size() << ", rag rows: " << all.rag.size() << ", "
        << seconds_since(start) << "\n";
    return kExitOk;
}

baseline::TuningGrid parse_grid(const std::string& text) {
    auto grid = baseline::TuningGrid::defaults();
    if (text == "default") return grid;
    std::istringstream parts(text);
    std::string part;
    while (std::getline(parts, part, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw UsageError("--grid: expected key=values, got '" + part + "'");
        const std::string key(trim(std::string_view(part).substr(0, eq)));
        const std::string values = part.substr(eq + 1);
        if (key == "ranks") {
            grid.ranks.clear();
            std::istringstream in(values);
            std::string v;
            while (std::getline(in, v, ',')) grid.ranks.push_back(parse_count(std::string(trim(v)), "--grid ranks"));
        } else if (key == "thresholds") {
            grid.thresholds.clear();
            const auto colon = values.find(':');
            if (colon != std::string::npos) {
                // lo:hi:step
                std::istringstream in(values);
                std::string lo, hi, step;
                std::getline(in, lo, ':');
                std::getline(in, hi, ':');
                std::getline(in, step, ':');
                const double l = ingest::parse_double(lo, "--grid"), h = ingest::parse_double(hi, "--grid"),
                             s = ingest::parse_double(step, "--grid");
                if (s <= 0 || h < l) throw UsageError("--grid: bad threshold range '" + values + "'");
                const auto n = static_cast<std::size_t>(std::floor((h - l) / s + 1e-9));
                for (std::size_t i = 0; i <= n; ++i) grid.thresholds.push_back(l + s * static_cast<double>(i));
            } else {
                std::istringstream in(values);
                std::string v;
                while (std::getline(in, v, ',')) grid.thresholds.push_back(ingest::parse_double(trim(v), "--grid"));
            }
        } else {
            throw UsageError("--grid: unknown key '" + key + "' (ranks, thresholds)");
        }
    }
    if (grid.ranks.empty() || grid.thresholds.empty()) throw UsageError("--grid: empty axis");
    return grid;
}

std::size_t max_lsa_rank(std::span<const std::string> docs) {
    return std::min(docs.size(), baseline::fit_tfidf(docs).vocabulary.size());
}

int cmd_baseline_tfidf(const Flags& f, std::ostream& out) {
    if (f.train.empty()) throw UsageError("--train is required");
    const auto grid = parse_grid(f.grid);
    const auto train = experiment::load_dataset(f.train);
    const bool cross = !f.test.empty();
    const auto test = cross ? experiment::load_dataset(f.test) : train;
    if (cross && test.content_hash == train.content_hash) {
        throw Error(ErrorCode::InvalidSpec, "--test names the same dataset as --train");
    }

    std::vector<AnnotatedPair> validation;
    std::vector<AnnotatedPair> test_pairs;
    eval::Split split;
    if (cross) {
        validation = train.annotations;
        test_pairs = test.annotations;
    } else {
        split = eval::stratified_split(train.annotations, f.split_ratio, f.seed);
        validation = split.pool;
        test_pairs = split.test;
    }

    const auto train_docs = baseline::corpus_documents(train.corpus);
    const auto tuned = baseline::tune(train_docs, validation, grid);
    const auto test_docs = baseline::corpus_documents(test.corpus);
    const std::size_t rank = std::min(tuned.config.lsa_rank, max_lsa_rank(test_docs));
    const auto model = baseline::fit(test_docs, rank);

    nlohmann::json config = {{"method", "tfidf-lsa"},
                             {"mode", cross ? "cross" : "intra"},
                             {"lsa_rank", tuned.config.lsa_rank},
                             {"applied_rank", model.lsa.rank},
                             {"threshold", tuned.config.threshold},
                             {"tokenizer", tuned.config.tokenizer},
                             {"grid_ranks", grid.ranks},
                             {"grid_thresholds", grid.thresholds},
                             {"train_dataset", {{"name", train.name}, {"content_sha256", train.content_hash}}},
                             {"test_dataset", {{"name", test.name}, {"content_sha256", test.content_hash}}}};
    if (!cross) {
        config["seed"] = f.seed;
        config["split_ratio"] = f.split_ratio;
    }
    const std::string hash = experiment::config_hash(config);
    const std::string model_id = "tfidf-lsa-d" + std::to_string(model.lsa.rank);

    std::vector<Prediction> predictions;
    for (const auto& t : test_pairs) {
        Prediction p;
        p.pair_id = t.pair.pair_id;
        p.req_a_id = t.pair.a.id;
        p.req_b_id = t.pair.b.id;
        const auto cos = baseline::pair_cosine(model, t.pair);
        p.label = baseline::classify_pair(model, t.pair, tuned.config.threshold);
        p.confidence = cos ? std::clamp(*cos, 0.0, 1.0) * 5.0 : 0.0;
        std::ostringstream why;
        if (cos) {
            why << "lsa cosine " << ingest::format_double(*cos) << " vs threshold "
                << ingest::format_double(tuned.config.threshold);
        } else {
            why << "no in-vocabulary terms";
        }
        p.rationale = why.str();
        p.model_id = model_id;
        p.config_hash = hash;
        predictions.push_back(std::move(p));
    }
    pipeline::sort_predictions(predictions);

    const fs::path dir = f.out;
    ingest::save_predictions(dir / "predictions.csv", predictions);
    nlohmann::json cfg = config;
    cfg["config_hash"] = hash;
    cfg["validation_macro_f1"] = tuned.macro_f1;
    ingest::write_text_file(dir / "config.json", cfg.dump(2) + "\n");
    const auto report = eval::compute_report(test_pairs, predictions);
    ingest::write_text_file(dir / "report.csv", eval::report_csv(report, hash));
    const auto table = eval::report_table(report, "TF-IDF & LSA (d=" + std::to_string(model.lsa.rank) + ", threshold " +
                                                      ingest::format_double(tuned.config.threshold) + ", config " +
                                                      hash + ")");
    ingest::write_text_file(dir / "report.txt", table);
    out << table;
    if (test_pairs.empty()) throw DomainFailure("the test set is empty");
    return kExitOk;
}

int cmd_kappa(const Flags& f, std::ostream& out) {
    if (f.annotator_a.empty() || f.annotator_b.empty()) throw UsageError("--annotator-a and --annotator-b are required");
    const Corpus corpus = corpus_from_files(f);
    const auto a = ingest::load_annotations(f.annotator_a, corpus);
    const auto b = ingest::load_annotations(f.annotator_b, corpus);
    std::map<std::string, DependencyLabel> by_id;
    for (const auto& x : b) by_id.emplace(x.pair.pair_id, x.label);
    if (a.size() != b.size()) {
        throw Error(ErrorCode::PairSetMismatch, "annotators labeled " + std::to_string(a.size()) + " and " +
                                                    std::to_string(b.size()) + " pairs");
    }
    std::vector<DependencyLabel> la, lb;
    for (const auto& x : a) {
        auto it = by_id.find(x.pair.pair_id);
        if (it == by_id.end()) throw Error(ErrorCode::PairSetMismatch, "pair " + x.pair.pair_id + " only labeled once");
        la.push_back(x.label);
        lb.push_back(it->second);
    }
    const double kappa = eval::cohens_kappa(la, lb);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < la.size(); ++i) agree += la[i] == lb[i];
    csv::write_table(fs::path(f.out) / "kappa.csv", {"pairs", "agreements", "kappa"},
                     {{std::to_string(la.size()), std::to_string(agree), ingest::format_double(kappa)}});
    out << "kappa " << std::fixed << std::setprecision(6) << kappa << " over " << la.size() << " pairs (" << agree
        << " agreements)\n";
    return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"Typed requirement dependency detection with retrieved context and few-shot examples", "reqdep"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "TOML config file (flags on the command line win)");

    std::map<CLI::App*, int (*)(const Flags&, std::ostream&)> handlers;
    auto add = [&](const char* name, const char* about, int (*handler)(const Flags&, std::ostream&)) {
        auto* sub = app.add_subcommand(name, about);
        handlers[sub] = handler;
        return sub;
    };
    auto requirement_inputs = [&](CLI::App* sub) {
        sub->add_option("--requirements", f.requirements, "Requirements CSV (id,system_id,text)");
        sub->add_option("--dataset", f.dataset, "Dataset directory (requirements.csv, annotations.csv, srs.txt)");
    };
    auto out_option = [&](CLI::App* sub) {
        sub->add_option("--out", f.out, "Output directory")->capture_default_str();
    };

    auto* ingest_check = add("ingest-check", "Load and validate input files, print a summary", cmd_ingest_check);
    requirement_inputs(ingest_check);
    ingest_check->add_option("--annotations", f.annotations, "Annotations CSV (req_a_id,req_b_id,label)");
    ingest_check->add_option("--srs", f.srs, "SRS plain text");
    ingest_check->add_option("--predictions", f.predictions, "Predictions CSV files");

    auto* pairs = add("pairs", "Write every unordered requirement pair", cmd_pairs);
    requirement_inputs(pairs);
    out_option(pairs);

    auto* tri = add("triage", "Rank all pairs by embedding cosine for annotation", cmd_triage);
    requirement_inputs(tri);
    tri->add_option("--annotations", f.annotations, "Partial annotations to fill in");
    tri->add_option("--top", f.top, "Keep only the first N rows (0 = all)")->capture_default_str();
    tri->add_option("--embed-model", f.embed_model, "Sentence encoder id")->capture_default_str();
    add_embedding_options(tri, f);
    out_option(tri);

    for (auto [name, about, handler] :
         {std::tuple{"retrieve-context", "Show the context chunks retrieved for one pair", cmd_retrieve_context},
          std::tuple{"retrieve-examples", "Show the examples retrieved for one pair", cmd_retrieve_examples}}) {
        auto* sub = add(name, about, handler);
        sub->add_option("--dataset", f.dataset, "Dataset directory")->required();
        sub->add_option("--pool-dataset", f.pool_dataset, "Example pool dataset (default: --dataset)");
        sub->add_option("--pair", f.pair_ids, "Two requirement ids")->expected(2)->required();
        sub->add_flag("--no-requirements-context", f.no_requirements_context,
                      "Leave the requirements list out of the context pool");
        add_retrieval_options(sub, f);
        add_embedding_options(sub, f);
        sub->add_option("--out", f.json_out, "Also write the JSON into this directory");
    }

    auto* predict = add("predict", "Classify pairs of one dataset", cmd_predict);
    predict->add_option("--dataset", f.dataset, "Dataset whose pairs are classified")->required();
    predict->add_option("--pairs", f.pairs_file, "CSV with req_a_id,req_b_id (default: all pairs)");
    predict->add_option("--pool-dataset", f.pool_dataset, "Annotated dataset supplying examples");
    add_retrieval_options(predict, f);
    add_embedding_options(predict, f);
    add_model_options(predict, f);
    add_experiment_options(predict, f);
    out_option(predict);

    auto* evaluate = add("evaluate", "Score prediction files against ground truth", cmd_evaluate);
    requirement_inputs(evaluate);
    evaluate->add_option("--annotations", f.annotations, "Ground-truth annotations CSV");
    evaluate->add_option("--predictions", f.predictions, "Predictions CSV (repeatable)")->required();
    evaluate->add_option("--split", f.split_file, "split.csv from a run; only its test side is scored");
    evaluate->add_flag("--force", f.force, "Accept prediction files with different config hashes");
    out_option(evaluate);

    auto* run = add("run", "Run one experiment (split, retrieve, classify, evaluate)", cmd_run);
    run->add_option("--mode", f.mode, "intra | cross")->capture_default_str();
    run->add_option("--dataset", f.dataset, "Dataset (intra mode)");
    run->add_option("--pool-dataset", f.pool_dataset, "Example pool dataset (cross mode)");
    run->add_option("--test-dataset", f.test_dataset, "Test dataset (cross mode)");
    add_retrieval_options(run, f);
    add_embedding_options(run, f);
    add_model_options(run, f);
    add_experiment_options(run, f);
    out_option(run);

    auto* sweep = add("sweep", "Run the retrieval configuration grid", cmd_sweep);
    sweep->add_option("--dataset", f.datasets, "Dataset directory (repeatable)")->required();
    sweep->add_option("--embed-models", f.embed_models, "Encoders")->delimiter(',')->capture_default_str();
    sweep->add_option("--metrics", f.metrics, "Similarity metrics")->delimiter(',')->capture_default_str();
    sweep->add_option("--aggregations", f.aggregations, "Pair aggregations")->delimiter(',')->capture_default_str();
    sweep->add_option("--ks", f.ks, "Examples per type")->delimiter(',')->capture_default_str();
    sweep->add_option("--chunk-sizes", f.chunk_sizes, "RAG chunk sizes")->delimiter(',')->capture_default_str();
    sweep->add_option("--chunk-counts", f.chunk_counts, "RAG chunk counts (or 'all')")->delimiter(',')->capture_default_str();
    sweep->add_option("--chunk-overlap", f.chunk_overlap, "RAG chunk overlap")->capture_default_str();
    sweep->add_flag("--no-rag", f.no_rag, "Skip the chunking phase");
    add_embedding_options(sweep, f);
    add_model_options(sweep, f);
    add_experiment_options(sweep, f);
    out_option(sweep);

    auto* tfidf = add("baseline-tfidf", "TF-IDF + LSA similarity baseline", cmd_baseline_tfidf);
    tfidf->add_option("--train", f.train, "Dataset used for tuning")->required();
    tfidf->add_option("--test", f.test, "Dataset to predict (default: 20% split of --train)");
    tfidf->add_option("--grid", f.grid, "'default' or 'ranks=25,50;thresholds=0.1:0.9:0.05'")->capture_default_str();
    tfidf->add_option("--split-ratio", f.split_ratio)->capture_default_str();
    tfidf->add_option("--seed", f.seed)->capture_default_str();
    out_option(tfidf);

    auto* kappa = add("kappa", "Cohen's kappa between two annotation files", cmd_kappa);
    requirement_inputs(kappa);
    kappa->add_option("--annotator-a", f.annotator_a, "First annotator's labels");
    kappa->add_option("--annotator-b", f.annotator_b, "Second annotator's labels");
    out_option(kappa);

    std::vector<const char*> argv = {"reqdep"};
    for (const auto& a : args) argv.push_back(a.c_str());

    CLI::App* active = nullptr;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        active = app.get_subcommands().front();
        return handlers.at(active)(f, out);
    } catch (const CLI::CallForHelp&) {
        auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        auto subs = app.get_subcommands();
        err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << (active ? active->help() : app.help());
        return kExitUsageError;
    } catch (const DomainFailure& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace reqdep::cli
