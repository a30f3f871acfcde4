#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rgar {

/// Whitespace-token count (the corpus token_estimate approximation).
std::size_t count_ws_tokens(std::string_view text);

std::vector<std::string_view> split_ws(std::string_view text);

std::string_view trim(std::string_view s);

/// Keeps the first max_tokens whitespace tokens, drops the tail.
/// max_tokens == 0 means unlimited.
std::string truncate_ws_tokens(std::string_view text, std::size_t max_tokens);

/// FNV-1a, seed-mixed. Stable across platforms; used by the mock embedder
/// and the scripted-backend request fingerprint.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

void log_warn(const std::string& msg);

}  // namespace rgar
