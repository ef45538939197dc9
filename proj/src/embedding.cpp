#include "reqdep/embedding.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include "reqdep/core.hpp"
#include "reqdep/error.hpp"
#include "reqdep/hashing.hpp"
#include "reqdep/http.hpp"
#include "reqdep/ingest.hpp"

namespace reqdep::embedding {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void add_hashed_direction(std::vector<double>& acc, std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto& v : acc) {
        const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
        v += 2.0 * unit - 1.0;
    }
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void check_comparable(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dimension() != v.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "vectors of length " + std::to_string(u.dimension()) + " and " +
                                                      std::to_string(v.dimension()));
    }
    if (u.model_id != v.model_id) {
        throw Error(ErrorCode::ModelMismatch, "vectors from '" + u.model_id + "' and '" + v.model_id + "'");
    }
}

}  // namespace

void EmbeddingProviderConfig::validate() const {
    if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "embedding batch_size must be >= 1");
    if (model_id.empty()) throw Error(ErrorCode::InvalidConfig, "embedding model_id is empty");
    if (provider_kind == ProviderKind::Remote && (!endpoint || endpoint->empty())) {
        throw Error(ErrorCode::InvalidConfig, "remote embedding provider requires an endpoint");
    }
}

EmbeddingVector StubEmbeddingProvider::embed_one(const std::string& text) const {
    std::vector<double> values(kStubDimension, 0.0);
    for (const auto& token : tokenize(text)) {
        add_hashed_direction(values, hash64(model_id_ + '\x1f' + token));
    }
    double n = norm(values);
    if (n == 0.0) {
        std::fill(values.begin(), values.end(), 0.0);
        add_hashed_direction(values, hash64(model_id_ + '\x1e' + text));
        n = norm(values);
    }
    for (auto& v : values) v /= n;
    return EmbeddingVector{std::move(values), model_id_};
}

std::vector<EmbeddingVector> StubEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(const EmbeddingProviderConfig& config) : config_(config) {
    config_.validate();
    if (config_.api_key.empty()) {
        if (const char* key = std::getenv("REQDEP_EMBED_API_KEY")) config_.api_key = key;
    }
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(std::span<const std::string> texts) {
    nlohmann::json body;
    body["model"] = config_.model_id;
    body["input"] = nlohmann::json::array();
    for (const auto& t : texts) body["input"].push_back(t);

    const auto response = http::post_json(http::parse_url(*config_.endpoint), body, config_.api_key,
                                          config_.request_timeout,
                                          {config_.max_attempts, config_.initial_backoff});
    if (!response.contains("data") || !response["data"].is_array()) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding response missing data array");
    }
    const auto& data = response["data"];
    if (data.size() != texts.size()) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding response has " + std::to_string(data.size()) +
                                                        " vectors for " + std::to_string(texts.size()) + " inputs");
    }
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        const std::size_t index = item.contains("index") ? item["index"].get<std::size_t>() : i;
        if (index >= texts.size() || filled[index] || !item.contains("embedding")) {
            throw Error(ErrorCode::ProviderUnavailable, "embedding response has a malformed entry at " + std::to_string(i));
        }
        out[index] = EmbeddingVector{item["embedding"].get<std::vector<double>>(), config_.model_id};
        filled[index] = true;
    }
    return out;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(*path_)) return;
    std::ifstream in(*path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            EmbeddingVector v{j.at("values").get<std::vector<double>>(), j.at("model").get<std::string>()};
            insert_locked(key(v.model_id, j.at("key").get<std::string>()), v.model_id, std::move(v));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedRow,
                        path_->string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::string EmbeddingCache::key(const std::string& model_id, const std::string& text_hash) {
    return model_id + '\x1f' + text_hash;
}

void EmbeddingCache::insert_locked(const std::string& k, const std::string& model_id, EmbeddingVector vector) {
    auto [it, inserted] = model_dimension_.emplace(model_id, vector.dimension());
    if (!inserted && it->second != vector.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "cache holds " + std::to_string(it->second) + "-dim vectors for '" +
                                                      model_id + "', got " + std::to_string(vector.dimension()));
    }
    entries_.insert_or_assign(k, std::move(vector));
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(const std::string& model_id, const std::string& text) const {
    const auto k = key(model_id, sha256_hex(text));
    std::shared_lock lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::store(const std::string& model_id, const std::string& text, const EmbeddingVector& vector) {
    const auto text_hash = sha256_hex(text);
    std::unique_lock lock(mutex_);
    const auto k = key(model_id, text_hash);
    if (entries_.contains(k)) return;
    insert_locked(k, model_id, vector);
    if (path_) {
        nlohmann::json j;
        j["model"] = model_id;
        j["key"] = text_hash;
        j["values"] = vector.values;
        std::ofstream out(*path_, std::ios::app);
        if (!out) throw Error(ErrorCode::IoError, "cannot append to cache '" + path_->string() + "'");
        out << j.dump() << '\n';
    }
}

std::size_t EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& config) {
    config.validate();
    if (config.provider_kind == ProviderKind::Remote) return std::make_unique<RemoteEmbeddingProvider>(config);
    return std::make_unique<StubEmbeddingProvider>(config.model_id);
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, EmbeddingProvider& provider,
                                         EmbeddingCache* cache, std::size_t batch_size) {
    if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
    for (const auto& t : texts) {
        if (trim(t).empty()) throw Error(ErrorCode::InvalidInput, "cannot embed empty text");
    }
    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (cache) slots[i] = cache->lookup(provider.model_id(), texts[i]);
        if (!slots[i]) misses.push_back(i);
    }
    for (std::size_t start = 0; start < misses.size(); start += batch_size) {
        const std::size_t end = std::min(misses.size(), start + batch_size);
        std::vector<std::string> batch;
        for (std::size_t m = start; m < end; ++m) batch.push_back(texts[misses[m]]);
        auto fresh = provider.embed(batch);
        if (fresh.size() != batch.size()) {
            throw Error(ErrorCode::ProviderUnavailable, "provider returned wrong number of vectors");
        }
        for (std::size_t m = start; m < end; ++m) {
            auto& v = fresh[m - start];
            for (double x : v.values) {
                if (!std::isfinite(x)) throw Error(ErrorCode::InvalidInput, "provider returned a non-finite value");
            }
            if (cache) cache->store(provider.model_id(), texts[misses[m]], v);
            slots[misses[m]] = std::move(v);
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProviderConfig& config) {
    auto provider = make_provider(config);
    std::optional<EmbeddingCache> cache;
    if (config.cache_path) cache.emplace(*config.cache_path);
    return embed_batch(texts, *provider, cache ? &*cache : nullptr, config.batch_size);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    check_comparable(u, v);
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
    }
    if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double euclidean_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    check_comparable(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double d = u.values[i] - v.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double euclidean_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    return 1.0 / (1.0 + euclidean_distance(u, v));
}

void EmbeddingStore::add(std::span<const std::string> texts, EmbeddingProvider& provider, EmbeddingCache* cache,
                         std::size_t batch_size) {
    if (provider.model_id() != model_id_) {
        throw Error(ErrorCode::ModelMismatch, "store for '" + model_id_ + "' fed by '" + provider.model_id() + "'");
    }
    std::vector<std::string> missing;
    std::unordered_map<std::string, bool> queued;
    for (const auto& t : texts) {
        if (!vectors_.contains(t) && queued.emplace(t, true).second) missing.push_back(t);
    }
    auto vectors = embed_batch(missing, provider, cache, batch_size);
    for (std::size_t i = 0; i < missing.size(); ++i) insert(missing[i], std::move(vectors[i]));
}

void EmbeddingStore::insert(const std::string& text, EmbeddingVector vector) {
    if (vector.model_id != model_id_) {
        throw Error(ErrorCode::ModelMismatch, "vector from '" + vector.model_id + "' in store for '" + model_id_ + "'");
    }
    if (!vectors_.empty() && vectors_.begin()->second.dimension() != vector.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "store vectors have inconsistent lengths");
    }
    vectors_.insert_or_assign(text, std::move(vector));
}

const EmbeddingVector& EmbeddingStore::at(const std::string& text) const {
    auto it = vectors_.find(text);
    if (it == vectors_.end()) {
        throw Error(ErrorCode::InvalidInput, "text was not embedded with '" + model_id_ + "': " + text.substr(0, 60));
    }
    return it->second;
}

}  // namespace reqdep::embedding
