#include "rgar/http.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>

#include "httplib.h"

namespace rgar {

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /path or /
};

ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint URL must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string http_post_json(const std::string& url, const std::string& api_key,
                           const std::string& body, const HttpRetryPolicy& policy) {
  const ParsedUrl parsed = parse_url(url);
  httplib::Client client(parsed.base);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(300, 0);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  const int attempts = std::max(1, policy.max_attempts);
  std::string last_error;
  int backoff = policy.backoff_ms;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(parsed.path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return res->body;
    if (res) {
      last_error = "HTTP " + std::to_string(res->status);
      // 4xx is not transient; surface it immediately.
      if (res->status < 500) {
        throw std::runtime_error("request to " + url + " failed after " +
                                 std::to_string(attempt) + " attempt(s): " + last_error +
                                 (res->body.empty() ? "" : " — " + res->body.substr(0, 200)));
      }
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
  throw std::runtime_error("request to " + url + " failed after " + std::to_string(attempts) +
                           " attempt(s): " + last_error);
}

}  // namespace rgar
