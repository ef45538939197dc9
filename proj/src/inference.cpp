#include "reqdep/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include "reqdep/error.hpp"
#include "reqdep/http.hpp"
#include "reqdep/ingest.hpp"

namespace reqdep::inference {

std::string_view provider_kind_name(ProviderKind kind) {
    return kind == ProviderKind::RemoteChat ? "remote-chat" : "stub";
}

void ModelConfig::validate() const {
    if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
    if (max_parallel < 1) throw Error(ErrorCode::InvalidConfig, "max_parallel must be >= 1");
    if (model_id.empty()) throw Error(ErrorCode::InvalidConfig, "model_id is empty");
    if (temperature < 0.0) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
    if (requests_per_second < 0.0) throw Error(ErrorCode::InvalidConfig, "requests_per_second must be >= 0");
    if (provider_kind == ProviderKind::RemoteChat && endpoint.empty()) {
        throw Error(ErrorCode::InvalidConfig, "remote chat provider requires an endpoint");
    }
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

enum class Field { Status, Rationale, Confidence };

std::string_view strip_chars(std::string_view s, std::string_view chars) {
    while (!s.empty() && chars.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
    while (!s.empty() && chars.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
    return s;
}

constexpr std::string_view kMarkers = " \t\r*#";

// Returns the field and its same-line value when `line` opens one of the answer labels.
std::optional<std::pair<Field, std::string_view>> match_field(std::string_view line) {
    const auto s = strip_chars(line, kMarkers);
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    std::string name;
    for (char c : strip_chars(s.substr(0, colon), kMarkers)) {
        name.push_back(c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    const auto value = strip_chars(s.substr(colon + 1), kMarkers);
    if (name == "dependency status") return std::pair{Field::Status, value};
    if (name == "rationale") return std::pair{Field::Rationale, value};
    if (name == "confidence score" || name == "confidence") return std::pair{Field::Confidence, value};
    return std::nullopt;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

}  // namespace

ParsedResponse parse_response(std::string_view text) {
    const auto lines = split_lines(text);
    std::optional<std::string_view> status, confidence;
    std::optional<std::string> rationale;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto field = match_field(lines[i]);
        if (!field) continue;
        const auto [kind, value] = *field;
        if (kind == Field::Status && !status) {
            status = value;
        } else if (kind == Field::Confidence && !confidence) {
            confidence = value;
        } else if (kind == Field::Rationale && !rationale) {
            std::string r(value);
            std::size_t j = i + 1;
            for (; j < lines.size() && !match_field(lines[j]); ++j) {
                r += '\n';
                r += lines[j];
            }
            rationale = std::string(trim(r));
            i = j - 1;
        }
    }

    if (!status) throw Error(ErrorCode::ParseFailure, "response has no Dependency_Status line");
    if (!rationale) throw Error(ErrorCode::ParseFailure, "response has no Rationale line");
    if (!confidence) throw Error(ErrorCode::ParseFailure, "response has no Confidence Score line");

    DependencyLabel label;
    try {
        label = canonical_label(*status);
    } catch (const Error&) {
        throw Error(ErrorCode::ParseFailure, "unrecognized dependency status '" + std::string(*status) + "'");
    }
    if (label == DependencyLabel::Unparsed) {
        throw Error(ErrorCode::ParseFailure, "model answered with the Unparsed sentinel");
    }

    const auto number = strip_chars(*confidence, " \t[]()\"'`");
    double score = 0.0;
    const auto result = std::from_chars(number.data(), number.data() + number.size(), score);
    if (result.ec != std::errc() || !std::isfinite(score)) {
        throw Error(ErrorCode::ParseFailure, "confidence '" + std::string(*confidence) + "' is not a number");
    }
    if (score < 0.0 || score > 5.0) {
        throw Error(ErrorCode::ConfidenceOutOfRange, "confidence " + std::string(number) + " outside [0, 5]");
    }
    return ParsedResponse{label, std::move(*rationale), score};
}

// ---------------------------------------------------------------------------
// Stub provider

namespace {

struct PromptPair {
    std::string a;
    std::string b;
};

std::string_view after_prefix(std::string_view line, std::string_view prefix) {
    return line.substr(0, prefix.size()) == prefix ? trim(line.substr(prefix.size())) : std::string_view{};
}

double jaccard(const std::set<std::string>& x, const std::set<std::string>& y) {
    if (x.empty() && y.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& t : x) common += y.count(t);
    return static_cast<double>(common) / static_cast<double>(x.size() + y.size() - common);
}

std::set<std::string> token_set(const std::string& s) {
    const auto tokens = tokenize(s);
    return {tokens.begin(), tokens.end()};
}

}  // namespace

std::string StubChatProvider::complete(const std::string& prompt) {
    const auto lines = split_lines(prompt);
    std::optional<PromptPair> target;
    std::vector<std::pair<PromptPair, std::string>> examples;

    enum class Section { Other, Requirements, Examples } section = Section::Other;
    PromptPair pending;
    for (const auto line : lines) {
        if (line == prompt::kRequirementsHeader) { section = Section::Requirements; continue; }
        if (line == prompt::kExamplesHeader) { section = Section::Examples; continue; }
        if (!line.empty() && line.front() == '#') { section = Section::Other; continue; }
        if (section == Section::Requirements) {
            if (auto v = after_prefix(line, "Requirement A: "); !v.empty()) pending.a = v;
            if (auto v = after_prefix(line, "Requirement B: "); !v.empty()) {
                pending.b = v;
                target = pending;
            }
        } else if (section == Section::Examples) {
            if (auto v = after_prefix(line, "Requirement A: "); !v.empty()) pending.a = v;
            if (auto v = after_prefix(line, "Requirement B: "); !v.empty()) pending.b = v;
            if (auto v = after_prefix(line, "Dependency: "); !v.empty()) examples.emplace_back(pending, std::string(v));
        }
    }

    std::string label = std::string(label_display_name(DependencyLabel::NoDependency));
    double best = 0.0;
    if (target) {
        const auto t1 = token_set(target->a), t2 = token_set(target->b);
        bool found = false;
        for (const auto& [pair, ex_label] : examples) {
            const auto ea = token_set(pair.a), eb = token_set(pair.b);
            const double s = (std::max(jaccard(t1, ea), jaccard(t1, eb)) + std::max(jaccard(t2, ea), jaccard(t2, eb))) / 2.0;
            if (!found || s > best) {
                best = s;
                label = ex_label;
                found = true;
            }
        }
    }
    const double confidence = std::round(best * 5.0);
    return "Dependency_Status: " + label + "\nRationale: closest annotated example has token overlap " +
           ingest::format_double(std::round(best * 1000.0) / 1000.0) +
           "\nConfidence Score: " + ingest::format_double(confidence) + "\n";
}

// ---------------------------------------------------------------------------
// Remote provider

RateLimiter::RateLimiter(double requests_per_second) {
    if (requests_per_second > 0.0) {
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second));
    }
}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

AuditLog::AuditLog(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::app);
    if (!out_) throw Error(ErrorCode::IoError, "cannot open audit log '" + path.string() + "'");
}

void AuditLog::record(const std::string& model_id, const std::string& prompt, const std::string& response,
                      const std::string& error) {
    nlohmann::json j;
    j["model"] = model_id;
    j["prompt"] = prompt;
    j["response"] = response;
    if (!error.empty()) j["error"] = error;
    std::lock_guard lock(mutex_);
    out_ << j.dump() << '\n';
    out_.flush();
}

RemoteChatProvider::RemoteChatProvider(const ModelConfig& config)
    : config_(config), limiter_(config.requests_per_second) {
    config_.validate();
    if (config_.api_key.empty()) {
        if (const char* key = std::getenv("REQDEP_LLM_API_KEY")) config_.api_key = key;
    }
    if (config_.audit_path) audit_ = std::make_unique<AuditLog>(*config_.audit_path);
}

std::string RemoteChatProvider::complete(const std::string& prompt) {
    nlohmann::json body;
    body["model"] = config_.model_id;
    body["temperature"] = config_.temperature;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});

    limiter_.acquire();
    nlohmann::json response;
    try {
        response = http::post_json(http::parse_url(config_.endpoint), body, config_.api_key, config_.request_timeout,
                                   {config_.network_attempts, config_.initial_backoff});
    } catch (const Error& e) {
        if (audit_) audit_->record(config_.model_id, prompt, "", e.what());
        throw;
    }

    std::string content;
    try {
        const auto& message = response.at("choices").at(0).at("message");
        const auto& c = message.at("content");
        if (c.is_string()) {
            content = c.get<std::string>();
        } else if (c.is_array()) {
            for (const auto& part : c) {
                if (part.contains("text") && part["text"].is_string()) {
                    if (!content.empty()) content += '\n';
                    content += part["text"].get<std::string>();
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        if (audit_) audit_->record(config_.model_id, prompt, response.dump(), e.what());
        throw Error(ErrorCode::ProviderUnavailable, std::string("chat response missing message content: ") + e.what());
    }
    if (audit_) audit_->record(config_.model_id, prompt, content, "");
    return content;
}

std::unique_ptr<ChatProvider> make_chat_provider(const ModelConfig& config) {
    config.validate();
    if (config.provider_kind == ProviderKind::RemoteChat) return std::make_unique<RemoteChatProvider>(config);
    return std::make_unique<StubChatProvider>(config.model_id);
}

// ---------------------------------------------------------------------------

Prediction classify_pair(const prompt::PromptContext& ctx, ChatProvider& provider, const ModelConfig& config,
                         const std::string& config_hash) {
    const std::string text = prompt::render_prompt(ctx);
    Prediction p;
    p.pair_id = ctx.pair.pair_id;
    p.req_a_id = ctx.pair.a.id;
    p.req_b_id = ctx.pair.b.id;
    p.model_id = provider.model_id();
    p.config_hash = config_hash;

    const int attempts = 1 + std::max(0, config.max_retries);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        p.raw_response = provider.complete(text);
        p.attempt_count = attempt;
        try {
            auto parsed = parse_response(p.raw_response);
            p.label = parsed.label;
            p.rationale = std::move(parsed.rationale);
            p.confidence = parsed.confidence;
            return p;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ParseFailure && e.code() != ErrorCode::ConfidenceOutOfRange) throw;
            last_error = e.what();
        }
    }
    p.label = DependencyLabel::Unparsed;
    p.confidence = kUnparsedConfidence;
    p.rationale = last_error;
    return p;
}

}  // namespace reqdep::inference
