#pragma once

#include <optional>
#include <string>

#include "rgar/pipeline.hpp"

namespace rgar {

/// Explicit flag values; anything unset falls through to the config file and
/// then the built-in defaults.
struct RunConfigOverrides {
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> n_retrieve;
  std::optional<FusionMode> fusion_mode;
  std::optional<NormDomainKind> domain_kind;
  std::optional<std::size_t> k_pool;
  std::optional<ReaderStyle> reader_style;
  std::optional<bool> prepend_question;
  std::optional<ExtractionMode> extraction_mode;
  std::optional<std::size_t> ehr_token_budget;
};

/// Flat key = value document mirroring the RunConfig field names. '#' starts
/// a comment line. Unknown keys are an error.
RunConfig load_run_config(const std::string& path);

/// Precedence: explicit flag > config file > built-in default.
RunConfig resolve_run_config(const std::string& config_path, const RunConfigOverrides& overrides);

}  // namespace rgar
