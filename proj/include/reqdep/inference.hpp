#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "reqdep/core.hpp"
#include "reqdep/prediction.hpp"
#include "reqdep/prompt.hpp"

namespace reqdep::inference {

enum class ProviderKind { RemoteChat, Stub };

std::string_view provider_kind_name(ProviderKind kind);

struct ModelConfig {
    ProviderKind provider_kind = ProviderKind::Stub;
    std::string model_id = "gpt-4.1";
    double temperature = 0.0;
    int max_retries = 1;
    std::chrono::seconds request_timeout{120};
    std::size_t max_parallel = 4;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key;  // falls back to REQDEP_LLM_API_KEY
    double requests_per_second = 0.0;  // 0 = unlimited
    int network_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::optional<std::filesystem::path> audit_path;

    void validate() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual const std::string& model_id() const = 0;
    /// Must be safe to call concurrently. Throws Error(ProviderUnavailable).
    virtual std::string complete(const std::string& prompt) = 0;
};

/// Offline stand-in: answers with the label of the example in the prompt whose
/// requirement texts best match the analyzed pair (token Jaccard, max-avg
/// combination); "No_dependency" when the prompt carries no examples.
class StubChatProvider final : public ChatProvider {
public:
    explicit StubChatProvider(std::string model_id = "stub-nearest-example") : model_id_(std::move(model_id)) {}
    const std::string& model_id() const override { return model_id_; }
    std::string complete(const std::string& prompt) override;

private:
    std::string model_id_;
};

/// Spaces request starts at least 1/rate seconds apart across threads.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    void acquire();

private:
    std::chrono::steady_clock::duration interval_{};
    std::chrono::steady_clock::time_point next_{};
    std::mutex mutex_;
};

/// JSONL transcript of every request/response pair; writes are serialized.
class AuditLog {
public:
    explicit AuditLog(const std::filesystem::path& path);
    void record(const std::string& model_id, const std::string& prompt, const std::string& response,
                const std::string& error);

private:
    std::ofstream out_;
    std::mutex mutex_;
};

/// OpenAI-style chat completion client:
/// `{"model", "temperature", "messages": [{"role": "user", "content": prompt}]}`.
class RemoteChatProvider final : public ChatProvider {
public:
    explicit RemoteChatProvider(const ModelConfig& config);
    const std::string& model_id() const override { return config_.model_id; }
    std::string complete(const std::string& prompt) override;

private:
    ModelConfig config_;
    RateLimiter limiter_;
    std::unique_ptr<AuditLog> audit_;
};

std::unique_ptr<ChatProvider> make_chat_provider(const ModelConfig& config);

struct ParsedResponse {
    DependencyLabel label;
    std::string rationale;
    double confidence;
};

/// Scans for the three answer labels (first occurrence of each). Throws
/// ParseFailure when one is missing or the label is not in the taxonomy, and
/// ConfidenceOutOfRange when the score falls outside [0, 5].
ParsedResponse parse_response(std::string_view text);

/// Renders the prompt, queries the provider, and parses; parse failures are
/// retried (max_retries) with the identical prompt, ending in an Unparsed
/// prediction that keeps the last raw response. Provider failures propagate.
Prediction classify_pair(const prompt::PromptContext& ctx, ChatProvider& provider, const ModelConfig& config,
                         const std::string& config_hash);

}  // namespace reqdep::inference
