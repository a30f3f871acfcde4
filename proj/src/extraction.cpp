#include "rgar/extraction.hpp"

#include <cctype>

#include "rgar/text.hpp"

namespace rgar {

namespace {

// Scans a bracketed list, collecting 'quoted' / "quoted" items. Handles
// backslash escapes; tolerates trailing commas and surrounding prose.
std::optional<std::vector<std::string>> parse_bracketed(const std::string& raw) {
  const auto open = raw.find('[');
  if (open == std::string::npos) return std::nullopt;
  const auto close = raw.rfind(']');
  if (close == std::string::npos || close <= open) return std::nullopt;

  std::vector<std::string> items;
  std::size_t i = open + 1;
  while (i < close) {
    const char c = raw[i];
    if (c == '\'' || c == '"') {
      const char quote = c;
      std::string item;
      ++i;
      while (i < close) {
        if (raw[i] == '\\' && i + 1 < close) {
          item += raw[i + 1];
          i += 2;
          continue;
        }
        if (raw[i] == quote) break;
        item += raw[i++];
      }
      if (i >= close) return std::nullopt;  // unterminated quote
      ++i;
      items.push_back(std::move(item));
    } else {
      ++i;
    }
  }
  if (items.empty()) return std::nullopt;
  return items;
}

bool is_bullet_line(std::string_view line, std::string_view& item_out) {
  std::string_view t = trim(line);
  if (t.empty()) return false;
  if (t.size() >= 2 && (t[0] == '-' || t[0] == '*') && t[1] == ' ') {
    item_out = trim(t.substr(2));
    return true;
  }
  // numbered: "1." / "12)" prefixes
  std::size_t d = 0;
  while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) ++d;
  if (d > 0 && d < t.size() && (t[d] == '.' || t[d] == ')')) {
    item_out = trim(t.substr(d + 1));
    return !item_out.empty();
  }
  return false;
}

std::optional<std::vector<std::string>> parse_bullets(const std::string& raw) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string::npos) end = raw.size();
    std::string_view item;
    if (is_bullet_line(std::string_view(raw).substr(start, end - start), item)) {
      items.emplace_back(item);
    }
    if (end == raw.size()) break;
    start = end + 1;
  }
  if (items.empty()) return std::nullopt;
  return items;
}

std::string join_items(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "; ";
    out += items[i];
  }
  return out;
}

}  // namespace

std::optional<std::vector<std::string>> parse_list_items(const std::string& raw) {
  if (auto items = parse_bracketed(raw)) return items;
  return parse_bullets(raw);
}

FactualExtract extract_facts(const std::string& ehr, const std::string& question,
                             const std::string& context_text, LlmGateway& gateway,
                             ExtractionMode mode, std::size_t round_index,
                             std::size_t ehr_token_budget) {
  FactualExtract out;
  out.round_index = round_index;
  out.mode = mode;

  if (trim(ehr).empty()) return out;  // nothing to extract, zero calls
  if (question.empty()) throw std::invalid_argument("extract_facts: question must be non-empty");

  std::string bounded_ehr = truncate_ws_tokens(ehr, ehr_token_budget);
  if (bounded_ehr.size() != ehr.size()) {
    log_warn("extract_facts: EHR truncated tail-first to " + std::to_string(ehr_token_budget) +
             " tokens");
  }

  ChatRequest filter_req = gateway.render(
      "extractor",
      {{"context", context_text}, {"ehr", bounded_ehr}, {"question", question}});
  const std::string filter_resp = gateway.chat(LlmRole::extractor, filter_req).text;
  out.raw_response = filter_resp;

  if (auto items = parse_list_items(filter_resp)) {
    out.filtered = join_items(*items);
  } else {
    out.filtered = std::string(trim(filter_resp));
    out.parse_failed = true;
  }

  if (mode == ExtractionMode::single_stage) {
    out.enriched = out.filtered;
    return out;
  }

  ChatRequest enrich_req = gateway.render(
      "extractor_enrich",
      {{"context", context_text}, {"ehr", out.filtered}, {"question", question}});
  const std::string enrich_resp = gateway.chat(LlmRole::extractor, enrich_req).text;
  out.raw_response = enrich_resp;
  out.enriched = std::string(trim(enrich_resp));
  return out;
}

}  // namespace rgar
