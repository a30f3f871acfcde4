#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rgar/llm.hpp"

namespace rgar {

enum class ExtractionMode { single_stage, two_stage };

struct FactualExtract {
  std::string filtered;      // span-level facts
  std::string enriched;      // analyzed/summarized representation
  std::string raw_response;  // last raw model output, kept for audit
  std::size_t round_index = 0;
  ExtractionMode mode = ExtractionMode::single_stage;
  bool parse_failed = false;
};

/// Tolerant list parsing: a bracketed list of quoted strings (single or
/// double quotes) or bullet/numbered lines. nullopt when neither form is
/// recognizable.
std::optional<std::vector<std::string>> parse_list_items(const std::string& raw);

/// Extracts question-relevant facts from the EHR using the retrieved context
/// text. Empty EHR short-circuits to an empty extract with zero gateway
/// calls. single_stage issues one extractor call and parses the list into
/// items joined by "; "; two_stage issues a filter call then an enrichment
/// call conditioned on the filtered facts. Unparseable responses fall back
/// to the raw text with parse_failed set; parsing never aborts.
FactualExtract extract_facts(const std::string& ehr, const std::string& question,
                             const std::string& context_text, LlmGateway& gateway,
                             ExtractionMode mode = ExtractionMode::single_stage,
                             std::size_t round_index = 0, std::size_t ehr_token_budget = 0);

}  // namespace rgar
