#include "rgar/query_gen.hpp"

#include <stdexcept>

namespace rgar {

QuerySet generate_expanded_queries(const std::string& basic_query, LlmGateway& gateway,
                                   std::size_t round_index) {
  if (basic_query.empty()) throw std::invalid_argument("basic query must be non-empty");

  QuerySet qs;
  qs.basic = basic_query;
  qs.round_index = round_index;

  auto call = [&](const std::string& template_name, const char* which) -> std::string {
    try {
      ChatRequest req = gateway.render(template_name, {{"question", basic_query}});
      return gateway.chat(LlmRole::generator, req).text;
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("query generation (") + which + ") failed: " + e.what());
    }
  };

  qs.answers = call("generator_answer", "answers");
  qs.titles = call("generator_title", "titles");
  qs.contexts = call("generator_context", "contexts");
  return qs;
}

}  // namespace rgar
