#pragma once

#include <cstddef>
#include <string>

#include "rgar/llm.hpp"

namespace rgar {

/// The basic query plus the three expanded queries used for fused retrieval.
/// Options never reach the generator, so by construction no expanded field
/// can contain option text.
struct QuerySet {
  std::string basic;
  std::string answers;
  std::string contexts;
  std::string titles;
  std::size_t round_index = 0;
};

/// Issues exactly three generator calls (answers, titles, contexts) with the
/// corresponding templates, binding the basic query. Raw responses are stored
/// as-is; empty responses are kept empty and handled by the retriever.
QuerySet generate_expanded_queries(const std::string& basic_query, LlmGateway& gateway,
                                   std::size_t round_index = 0);

}  // namespace rgar
