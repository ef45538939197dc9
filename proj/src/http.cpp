#include "reqdep/http.hpp"

#include <httplib.h>

#include <thread>

#include "reqdep/error.hpp"

namespace reqdep::http {

Endpoint parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "endpoint '" + url + "' is not an absolute URL");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorCode::InvalidConfig, "endpoint '" + url + "' must use http or https");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path_start);
    ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (ep.origin.size() <= scheme_end + 3) {
        throw Error(ErrorCode::InvalidConfig, "endpoint '" + url + "' has no host");
    }
    return ep;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, const std::string& api_key,
                         std::chrono::seconds timeout, const RetryPolicy& retry) {
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const std::string payload = body.dump();
    std::string last_error;
    auto backoff = retry.initial_backoff;
    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(endpoint.path, headers, payload, "application/json");
        if (res) {
            if (res->status >= 200 && res->status < 300) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::exception& e) {
                    throw Error(ErrorCode::ProviderUnavailable,
                                endpoint.origin + endpoint.path + " returned invalid JSON: " + e.what());
                }
            }
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            if (res->status != 429 && res->status < 500) break;
        } else {
            last_error = httplib::to_string(res.error());
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::ProviderUnavailable, endpoint.origin + endpoint.path + ": " + last_error);
}

}  // namespace reqdep::http
