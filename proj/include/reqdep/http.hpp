#pragma once

#include <chrono>
#include <string>

#include "vendor_json.hpp"

namespace reqdep::http {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // begins with '/'
};

/// Throws InvalidConfig for anything that is not an absolute http(s) URL.
Endpoint parse_url(const std::string& url);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
};

/// POSTs JSON with an optional bearer token. Connection failures, 429 and 5xx
/// are retried with exponential backoff; after the last attempt (or on any
/// other non-2xx status) throws Error(ProviderUnavailable).
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, const std::string& api_key,
                         std::chrono::seconds timeout, const RetryPolicy& retry);

}  // namespace reqdep::http
