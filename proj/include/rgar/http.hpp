#pragma once

#include <string>

namespace rgar {

struct HttpRetryPolicy {
  int max_attempts = 3;
  int backoff_ms = 100;  // doubled after each failed attempt
};

/// POST a JSON body to a full URL ("http://host:port/path"), with bearer auth
/// when api_key is non-empty. Retries transport failures and 5xx responses
/// with bounded exponential backoff; throws with the attempt count when all
/// attempts fail. Returns the response body on 2xx.
std::string http_post_json(const std::string& url, const std::string& api_key,
                           const std::string& body, const HttpRetryPolicy& policy);

}  // namespace rgar
