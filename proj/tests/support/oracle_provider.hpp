#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "reqdep/inference.hpp"

namespace fixtures {

/// Answers with the label of the prompt example whose pair scores highest against
/// the analyzed pair. Scoring is recomputed here from stub embeddings with a
/// plain Euclidean max-avg, independent of the retrieval module.
class NearestExampleOracle final : public reqdep::inference::ChatProvider {
public:
    explicit NearestExampleOracle(std::string embed_model = "all-mpnet-base-v2");
    const std::string& model_id() const override { return model_id_; }
    std::string complete(const std::string& prompt) override;

private:
    std::string model_id_ = "oracle-nearest-example";
    std::string embed_model_;
};

/// Returns the scripted responses in order (the last one repeats) and records prompts.
class ScriptedProvider final : public reqdep::inference::ChatProvider {
public:
    explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
    const std::string& model_id() const override { return model_id_; }
    std::string complete(const std::string& prompt) override;

    std::vector<std::string> prompts() const;
    std::size_t calls() const { return calls_.load(); }

private:
    std::string model_id_ = "scripted";
    std::vector<std::string> responses_;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

/// Succeeds (stub answers) for the first `ok_calls` requests, then throws ProviderUnavailable.
class FailingProvider final : public reqdep::inference::ChatProvider {
public:
    explicit FailingProvider(std::size_t ok_calls) : ok_calls_(ok_calls) {}
    const std::string& model_id() const override { return model_id_; }
    std::string complete(const std::string& prompt) override;

private:
    std::string model_id_ = "failing";
    std::size_t ok_calls_;
    std::atomic<std::size_t> calls_{0};
    reqdep::inference::StubChatProvider stub_;
};

}  // namespace fixtures
