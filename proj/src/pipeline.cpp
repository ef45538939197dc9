#include "reqdep/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "reqdep/error.hpp"

namespace reqdep::pipeline {

prompt::PromptContext build_prompt_context(const RequirementPair& pair, const DetectionInputs& inputs) {
    if (!inputs.store) throw Error(ErrorCode::InvalidInput, "detection inputs carry no embedding store");
    prompt::PromptContext ctx;
    ctx.domain_name = inputs.domain_name;
    ctx.system_name = inputs.system_name.empty() ? pair.a.system_id : inputs.system_name;
    ctx.pair = pair;
    ctx.definitions = inputs.definitions;
    if (!inputs.zero_shot) {
        ctx.examples = retrieval::retrieve_examples(pair, inputs.pool, *inputs.store, inputs.retrieval);
        for (auto& sc : retrieval::retrieve_context(pair, inputs.chunks, *inputs.store, inputs.retrieval)) {
            ctx.context_chunks.push_back(std::move(sc.chunk));
        }
    }
    return ctx;
}

void sort_predictions(std::vector<Prediction>& predictions) {
    std::sort(predictions.begin(), predictions.end(),
              [](const Prediction& x, const Prediction& y) { return x.pair_id < y.pair_id; });
}

DetectionResult detect(std::span<const RequirementPair> pairs, const DetectionInputs& inputs,
                       inference::ChatProvider& provider) {
    inputs.model.validate();
    if (!inputs.zero_shot) inputs.retrieval.validate();

    std::vector<std::optional<Prediction>> slots(pairs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::mutex error_mutex;
    std::optional<std::string> error;

    const auto worker = [&] {
        while (!aborted.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            try {
                const auto ctx = build_prompt_context(pairs[i], inputs);
                slots[i] = inference::classify_pair(ctx, provider, inputs.model, inputs.config_hash);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::string("pair ") + pairs[i].pair_id + ": " + e.what();
                aborted = true;
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(inputs.model.max_parallel, std::max<std::size_t>(1, pairs.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    DetectionResult result;
    for (auto& s : slots) {
        if (s) result.predictions.push_back(std::move(*s));
    }
    sort_predictions(result.predictions);
    result.error = std::move(error);
    return result;
}

std::string context_pool_text(const Corpus& corpus) {
    std::string text = corpus.srs_text().value_or("");
    if (corpus.requirements().empty()) return text;
    if (!text.empty() && text.back() != '\n') text += '\n';
    if (!text.empty()) text += '\n';
    text += "Requirements:\n";
    for (const auto& r : corpus.requirements()) text += r.id + ": " + r.text + '\n';
    return text;
}

}  // namespace reqdep::pipeline
