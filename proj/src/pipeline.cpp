#include "rgar/pipeline.hpp"

#include <cctype>
#include <cstring>
#include <stdexcept>

#include "rgar/text.hpp"

namespace rgar {

using nlohmann::json;
using nlohmann::ordered_json;

void validate_sample(const QASample& sample) {
  if (sample.question.empty()) throw std::invalid_argument("sample has empty question");
  if (sample.options.empty()) throw std::invalid_argument("sample has no options");
  char expected = 'A';
  for (const auto& [letter, text] : sample.options) {
    if (letter.size() != 1 || letter[0] != expected) {
      throw std::invalid_argument("sample option letters must be consecutive from A, got '" +
                                  letter + "'");
    }
    ++expected;
  }
  if (!sample.gold.empty() && !sample.options.count(sample.gold)) {
    throw std::invalid_argument("sample gold '" + sample.gold + "' is not an option letter");
  }
}

const char* to_string(ChoiceMethod m) {
  switch (m) {
    case ChoiceMethod::json: return "json";
    case ChoiceMethod::regex: return "regex";
    case ChoiceMethod::letter_fallback: return "letter_fallback";
    case ChoiceMethod::failed: return "failed";
  }
  return "failed";
}

std::string build_basic_query(const std::string& question, const std::string& factual) {
  if (question.empty()) throw std::invalid_argument("build_basic_query: question must be non-empty");
  if (trim(factual).empty()) return question;
  return question + "\n" + factual;
}

std::string render_options(const QASample& sample) {
  std::string out;
  for (const auto& [letter, text] : sample.options) {
    if (!out.empty()) out += "\n";
    out += letter + ". " + text;
  }
  return out;
}

namespace {

bool is_valid_letter(char c, const std::string& valid_letters) {
  return valid_letters.find(c) != std::string::npos;
}

// A candidate letter from a JSON "answer_choice" value: leading letter,
// optionally followed by punctuation ("D", "d", "D.", "D) ...").
std::string letter_from_value(const std::string& value, const std::string& valid_letters) {
  std::string_view v = trim(value);
  if (v.empty() || !std::isalpha(static_cast<unsigned char>(v[0]))) return "";
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
  if (!is_valid_letter(up, valid_letters)) return "";
  if (v.size() > 1 && std::isalnum(static_cast<unsigned char>(v[1]))) return "";
  return std::string(1, up);
}

// Finds the matching close brace of raw[start] == '{', skipping string
// literals. Returns npos when unbalanced.
std::size_t match_brace(const std::string& raw, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string::npos;
}

std::string try_json_route(const std::string& raw, const std::string& valid_letters) {
  std::string last;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '{') continue;
    const std::size_t j = match_brace(raw, i);
    if (j == std::string::npos) continue;
    json obj = json::parse(raw.substr(i, j - i + 1), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    auto it = obj.find("answer_choice");
    if (it == obj.end() || !it->is_string()) continue;
    std::string letter = letter_from_value(it->get<std::string>(), valid_letters);
    if (!letter.empty()) last = letter;
  }
  return last;
}

std::string try_pattern_route(const std::string& raw, const std::string& valid_letters) {
  static constexpr const char* kKey = "answer_choice";
  static constexpr const char* kSeparators = " \t\r\n\"':=()[]{},";
  std::size_t pos = raw.rfind(kKey);
  while (pos != std::string::npos) {
    std::size_t k = pos + std::strlen(kKey);
    std::size_t skipped = 0;
    while (k < raw.size() && std::strchr(kSeparators, raw[k]) != nullptr) {
      ++k;
      ++skipped;
    }
    if (skipped > 0 && k < raw.size() && std::isalpha(static_cast<unsigned char>(raw[k]))) {
      const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[k])));
      const bool standalone = k + 1 >= raw.size() ||
                              !std::isalnum(static_cast<unsigned char>(raw[k + 1]));
      if (standalone && is_valid_letter(up, valid_letters)) return std::string(1, up);
    }
    if (pos == 0) break;
    pos = raw.rfind(kKey, pos - 1);
  }
  return "";
}

std::string try_cue_route(const std::string& raw, const std::string& valid_letters) {
  std::string lower(raw.size(), '\0');
  for (std::size_t i = 0; i < raw.size(); ++i) {
    lower[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
  }
  static constexpr const char* kCues[] = {"answer is", "option"};
  static constexpr const char* kSeparators = " \t\r\n\"':*.()[]";
  std::string best;
  std::size_t best_pos = 0;
  for (const char* cue : kCues) {
    const std::size_t cue_len = std::strlen(cue);
    std::size_t pos = lower.find(cue);
    while (pos != std::string::npos) {
      std::size_t k = pos + cue_len;
      std::size_t skipped = 0;
      while (k < raw.size() && std::strchr(kSeparators, raw[k]) != nullptr) {
        ++k;
        ++skipped;
      }
      // Fallback requires a literal standalone capital.
      if (skipped > 0 && k < raw.size() && is_valid_letter(raw[k], valid_letters) &&
          std::isupper(static_cast<unsigned char>(raw[k]))) {
        const bool standalone =
            k + 1 >= raw.size() || !std::isalnum(static_cast<unsigned char>(raw[k + 1]));
        if (standalone && (best.empty() || k >= best_pos)) {
          best = std::string(1, raw[k]);
          best_pos = k;
        }
      }
      pos = lower.find(cue, pos + 1);
    }
  }
  return best;
}

}  // namespace

std::pair<std::string, ChoiceMethod> extract_choice(const std::string& raw,
                                                    const std::string& valid_letters) {
  if (valid_letters.empty()) return {"", ChoiceMethod::failed};
  if (std::string letter = try_json_route(raw, valid_letters); !letter.empty()) {
    return {letter, ChoiceMethod::json};
  }
  if (std::string letter = try_pattern_route(raw, valid_letters); !letter.empty()) {
    return {letter, ChoiceMethod::regex};
  }
  if (std::string letter = try_cue_route(raw, valid_letters); !letter.empty()) {
    return {letter, ChoiceMethod::letter_fallback};
  }
  return {"", ChoiceMethod::failed};
}

Pipeline::Pipeline(const DenseRetriever& retriever, LlmGateway& gateway)
    : retriever_(retriever), gateway_(gateway) {}

namespace {
std::string valid_letters_of(const QASample& sample) {
  std::string letters;
  for (const auto& [letter, text] : sample.options) letters += letter;
  return letters;
}
}  // namespace

AnswerRecord Pipeline::answer(const QASample& sample, const RetrievedContext* context,
                              const RunConfig& config) const {
  validate_sample(sample);
  const std::string ehr = truncate_ws_tokens(sample.ehr, config.ehr_token_budget);
  // Appendix-style merge: the record text rides inside the question binding.
  const std::string question_binding =
      trim(ehr).empty() ? sample.question : ehr + "\n" + sample.question;
  const std::string context_text = context ? retriever_.render_context(*context) : "";
  const char* template_name =
      config.reader_style == ReaderStyle::cot ? "reader_cot" : "reader_plain";

  AnswerRecord rec;
  try {
    ChatRequest req = gateway_.render(template_name, {{"context", context_text},
                                                      {"question", question_binding},
                                                      {"options", render_options(sample)}});
    rec.raw_output = gateway_.chat(LlmRole::reader, req).text;
  } catch (const std::exception& e) {
    log_warn("reader call failed for sample '" + sample.id + "': " + e.what());
    rec.method = ChoiceMethod::failed;
    return rec;
  }
  auto [letter, method] = extract_choice(rec.raw_output, valid_letters_of(sample));
  rec.choice = letter;
  rec.method = method;
  return rec;
}

PipelineTrace Pipeline::run_rgar(const QASample& sample, const RunConfig& config) const {
  PipelineTrace trace;
  trace.sample_id = sample.id;
  try {
    validate_sample(sample);
    const std::string ehr = truncate_ws_tokens(sample.ehr, config.ehr_token_budget);
    if (ehr.size() != sample.ehr.size()) {
      log_warn("sample '" + sample.id + "': EHR truncated tail-first to " +
               std::to_string(config.ehr_token_budget) + " tokens");
    }

    auto retrieve = [&](const std::string& basic, std::size_t round) -> RoundRecord {
      RoundRecord rr;
      if (config.fusion_mode == FusionMode::single) {
        // Multi-query generation removed (ablation): score the basic query.
        rr.query_set.basic = basic;
        rr.query_set.round_index = round;
        rr.retrieved = retriever_.top_n(basic, config.n_retrieve);
      } else {
        rr.query_set = generate_expanded_queries(basic, gateway_, round);
        rr.retrieved =
            retriever_.retrieve_fused(rr.query_set, config.n_retrieve, config.prepend_question);
      }
      return rr;
    };

    trace.records.push_back(retrieve(build_basic_query(sample.question, ehr), 0));

    for (std::size_t r = 1; r <= config.rounds; ++r) {
      const std::string context_text =
          retriever_.render_context(trace.records.back().retrieved);
      FactualExtract fe = extract_facts(ehr, sample.question, context_text, gateway_,
                                        config.extraction_mode, r, 0);
      RoundRecord rr = retrieve(build_basic_query(sample.question, fe.enriched), r);
      rr.extract = std::move(fe);
      trace.records.push_back(std::move(rr));
    }

    trace.final_context = trace.records.back().retrieved;
    trace.answer = answer(sample, &trace.final_context, config);
  } catch (const std::exception& e) {
    trace.error = e.what();
    trace.answer = AnswerRecord{};
  }
  return trace;
}

namespace {

ordered_json context_to_json(const RetrievedContext& ctx) {
  ordered_json entries = ordered_json::array();
  for (const ScoredChunk& e : ctx.entries) {
    entries.push_back({{"chunk_id", e.chunk_id}, {"score", e.score}});
  }
  ordered_json j;
  j["fusion_mode"] = to_string(ctx.fusion_mode);
  j["normalization_domain"] = ctx.normalization_domain.to_string();
  j["n_requested"] = ctx.n_requested;
  j["entries"] = entries;
  return j;
}

ordered_json query_set_to_json(const QuerySet& qs) {
  ordered_json j;
  j["basic"] = qs.basic;
  j["answers"] = qs.answers;
  j["titles"] = qs.titles;
  j["contexts"] = qs.contexts;
  j["round_index"] = qs.round_index;
  return j;
}

ordered_json extract_to_json(const FactualExtract& fe) {
  ordered_json j;
  j["filtered"] = fe.filtered;
  j["enriched"] = fe.enriched;
  j["raw_response"] = fe.raw_response;
  j["round_index"] = fe.round_index;
  j["mode"] = fe.mode == ExtractionMode::single_stage ? "single_stage" : "two_stage";
  j["parse_failed"] = fe.parse_failed;
  return j;
}

}  // namespace

ordered_json answer_to_json(const AnswerRecord& rec) {
  ordered_json j;
  if (rec.choice.empty()) {
    j["choice"] = nullptr;
  } else {
    j["choice"] = rec.choice;
  }
  j["extraction_method"] = to_string(rec.method);
  j["raw_output"] = rec.raw_output;
  return j;
}

ordered_json trace_to_json(const PipelineTrace& trace) {
  ordered_json j;
  j["sample_id"] = trace.sample_id;
  j["error"] = trace.error;
  ordered_json records = ordered_json::array();
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const RoundRecord& rr = trace.records[r];
    ordered_json rec;
    rec["round"] = r;
    rec["extract"] = rr.extract ? extract_to_json(*rr.extract) : ordered_json(nullptr);
    rec["query_set"] = query_set_to_json(rr.query_set);
    rec["retrieved"] = context_to_json(rr.retrieved);
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  j["final_context"] = context_to_json(trace.final_context);
  j["answer"] = answer_to_json(trace.answer);
  return j;
}

}  // namespace rgar
