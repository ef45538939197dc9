#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace reqdep::embedding {

struct EmbeddingVector {
    std::vector<double> values;
    std::string model_id;

    std::size_t dimension() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

enum class ProviderKind { Remote, Stub };

inline constexpr std::size_t kStubDimension = 16;

struct EmbeddingProviderConfig {
    ProviderKind provider_kind = ProviderKind::Stub;
    std::optional<std::string> endpoint;
    std::string model_id = "all-mpnet-base-v2";
    std::size_t batch_size = 64;
    std::optional<std::filesystem::path> cache_path;
    std::string api_key;  // falls back to REQDEP_EMBED_API_KEY
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds request_timeout{60};

    /// Throws InvalidConfig (remote without endpoint, batch_size 0, ...).
    void validate() const;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const std::string& model_id() const = 0;
    /// One vector per text, same order. A call is one provider request.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Deterministic, network-free encoder. Each lowercase alphanumeric token t
/// contributes a pseudo-random vector in [-1,1]^16 seeded by
/// SHA-256(model_id \x1f t); the sum is L2-normalized. Texts with no tokens
/// (or a zero sum) use the same construction seeded by the whole text.
class StubEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit StubEmbeddingProvider(std::string model_id) : model_id_(std::move(model_id)) {}
    const std::string& model_id() const override { return model_id_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    EmbeddingVector embed_one(const std::string& text) const;

private:
    std::string model_id_;
};

/// OpenAI-style `POST {"model", "input": [...]}` -> `{"data": [{"embedding", "index"}]}`.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(const EmbeddingProviderConfig& config);
    const std::string& model_id() const override { return config_.model_id; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    EmbeddingProviderConfig config_;
};

/// Append-only JSONL cache keyed by (model_id, SHA-256(text)). Concurrent
/// lookups share a lock; inserts (and file appends) are serialized.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<EmbeddingVector> lookup(const std::string& model_id, const std::string& text) const;
    /// Throws DimensionMismatch when the model already has vectors of a different length.
    void store(const std::string& model_id, const std::string& text, const EmbeddingVector& vector);
    std::size_t size() const;

private:
    static std::string key(const std::string& model_id, const std::string& text_hash);
    void insert_locked(const std::string& key, const std::string& model_id, EmbeddingVector vector);

    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    std::unordered_map<std::string, std::size_t> model_dimension_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& config);

/// Cache-aware batching: misses are sent to the provider in chunks of batch_size.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, EmbeddingProvider& provider,
                                         EmbeddingCache* cache, std::size_t batch_size);

/// Builds the provider (and cache, when cache_path is set) from config.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProviderConfig& config);

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);
double euclidean_distance(const EmbeddingVector& u, const EmbeddingVector& v);
/// 1 / (1 + ||u - v||), in (0, 1].
double euclidean_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Text -> vector lookup for one encoder. Requirements and chunks are looked
/// up by content, so identical texts share one vector.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::string model_id) : model_id_(std::move(model_id)) {}

    const std::string& model_id() const { return model_id_; }
    /// Embeds every text not yet present.
    void add(std::span<const std::string> texts, EmbeddingProvider& provider, EmbeddingCache* cache,
             std::size_t batch_size);
    void insert(const std::string& text, EmbeddingVector vector);
    /// Throws InvalidInput when the text was never embedded.
    const EmbeddingVector& at(const std::string& text) const;
    bool contains(const std::string& text) const { return vectors_.contains(text); }
    std::size_t size() const { return vectors_.size(); }

private:
    std::string model_id_;
    std::unordered_map<std::string, EmbeddingVector> vectors_;
};

}  // namespace reqdep::embedding
