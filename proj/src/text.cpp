#include "rgar/text.hpp"

#include <cctype>
#include <cstdio>

namespace rgar {

namespace {
inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::size_t count_ws_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_ws(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_ws(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ws(s[b])) ++b;
  while (e > b && is_ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string truncate_ws_tokens(std::string_view text, std::size_t max_tokens) {
  if (max_tokens == 0) return std::string(text);
  std::size_t n = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_ws(text[i])) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      if (++n > max_tokens) return std::string(text.substr(0, i));
    }
  }
  return std::string(text);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull ^ (seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void log_warn(const std::string& msg) {
  std::fprintf(stderr, "[rgar] warning: %s\n", msg.c_str());
}

}  // namespace rgar
