#include "rgar/config.hpp"

#include <fstream>
#include <stdexcept>

#include "rgar/text.hpp"

namespace rgar {

namespace {

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value,
              const std::string& where) {
  auto as_size = [&]() -> std::size_t { return std::stoull(value); };
  auto as_bool = [&]() -> bool { return value == "true" || value == "1" || value == "yes"; };
  if (key == "rounds") {
    cfg.rounds = as_size();
  } else if (key == "n_retrieve") {
    cfg.n_retrieve = as_size();
  } else if (key == "fusion_mode") {
    if (value == "single") {
      cfg.fusion_mode = FusionMode::single;
    } else if (value == "fused" || value == "gar") {
      cfg.fusion_mode = FusionMode::fused;
    } else {
      throw std::runtime_error(where + ": bad fusion_mode '" + value + "'");
    }
  } else if (key == "normalization_domain") {
    if (value == "full_corpus" || value == "full") {
      cfg.normalization_domain.kind = NormDomainKind::full_corpus;
    } else if (value == "pooled") {
      cfg.normalization_domain.kind = NormDomainKind::pooled;
    } else {
      throw std::runtime_error(where + ": bad normalization_domain '" + value + "'");
    }
  } else if (key == "k_pool") {
    cfg.normalization_domain.k_pool = as_size();
  } else if (key == "reader_style") {
    cfg.reader_style = value == "cot" ? ReaderStyle::cot : ReaderStyle::plain;
  } else if (key == "prepend_question") {
    cfg.prepend_question = as_bool();
  } else if (key == "extraction_mode") {
    cfg.extraction_mode =
        value == "two_stage" ? ExtractionMode::two_stage : ExtractionMode::single_stage;
  } else if (key == "ehr_token_budget") {
    cfg.ehr_token_budget = as_size();
  } else {
    throw std::runtime_error(where + ": unknown config key '" + key + "'");
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    apply_kv(cfg, key, value, path + ":" + std::to_string(line_no));
  }
  return cfg;
}

RunConfig resolve_run_config(const std::string& config_path,
                             const RunConfigOverrides& overrides) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (overrides.rounds) cfg.rounds = *overrides.rounds;
  if (overrides.n_retrieve) cfg.n_retrieve = *overrides.n_retrieve;
  if (overrides.fusion_mode) cfg.fusion_mode = *overrides.fusion_mode;
  if (overrides.domain_kind) cfg.normalization_domain.kind = *overrides.domain_kind;
  if (overrides.k_pool) cfg.normalization_domain.k_pool = *overrides.k_pool;
  if (overrides.reader_style) cfg.reader_style = *overrides.reader_style;
  if (overrides.prepend_question) cfg.prepend_question = *overrides.prepend_question;
  if (overrides.extraction_mode) cfg.extraction_mode = *overrides.extraction_mode;
  if (overrides.ehr_token_budget) cfg.ehr_token_budget = *overrides.ehr_token_budget;
  return cfg;
}

}  // namespace rgar
