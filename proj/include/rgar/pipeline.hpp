#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rgar/extraction.hpp"
#include "rgar/llm.hpp"
#include "rgar/query_gen.hpp"
#include "rgar/retriever.hpp"

namespace rgar {

/// One benchmark item: question Q, optional record text F, options A.
struct QASample {
  std::string id;
  std::string question;
  std::string ehr;                             // may be empty
  std::map<std::string, std::string> options;  // "A" -> text, letters consecutive from A
  std::string gold;                            // option letter, or empty when absent
};

/// Validates option letters (consecutive from "A") and gold membership.
void validate_sample(const QASample& sample);

enum class ReaderStyle { plain, cot };

struct RunConfig {
  std::size_t rounds = 2;
  std::size_t n_retrieve = 32;
  FusionMode fusion_mode = FusionMode::fused;
  NormDomain normalization_domain;
  ReaderStyle reader_style = ReaderStyle::plain;
  bool prepend_question = false;
  ExtractionMode extraction_mode = ExtractionMode::single_stage;
  std::size_t ehr_token_budget = 0;  // whitespace tokens; 0 = unlimited
};

enum class ChoiceMethod { json, regex, letter_fallback, failed };
const char* to_string(ChoiceMethod m);

struct AnswerRecord {
  std::string choice;  // option letter, empty when none
  std::string raw_output;
  ChoiceMethod method = ChoiceMethod::failed;
};

struct RoundRecord {
  std::optional<FactualExtract> extract;  // absent for the initial retrieval
  QuerySet query_set;
  RetrievedContext retrieved;
};

struct PipelineTrace {
  std::string sample_id;
  std::vector<RoundRecord> records;  // rounds + 1 entries
  RetrievedContext final_context;
  AnswerRecord answer;
  std::string error;  // non-empty when the sample failed mid-pipeline
};

/// question joined to the factual text with a single newline; the factual
/// side is omitted when empty.
std::string build_basic_query(const std::string& question, const std::string& factual);

/// "A. text" lines for the {{options}} binding.
std::string render_options(const QASample& sample);

/// Choice extraction over a full generation, tried in order: last
/// well-formed JSON object carrying "answer_choice", then an
/// answer_choice-pattern match, then a standalone capital adjacent to an
/// "answer is" / "option" cue. valid_letters holds the sample's letters,
/// e.g. "ABCD". Never throws; no match returns ("", failed).
std::pair<std::string, ChoiceMethod> extract_choice(const std::string& raw,
                                                    const std::string& valid_letters);

class Pipeline {
 public:
  Pipeline(const DenseRetriever& retriever, LlmGateway& gateway);

  /// The full recurrence: initial fused retrieval from Q (+) F, then per
  /// round extract-facts -> rebuild basic query -> re-retrieve, finally
  /// answering from the last retrieved context only. Extract output never
  /// reaches the reader prompt. Stage errors are recorded in the trace
  /// rather than thrown.
  PipelineTrace run_rgar(const QASample& sample, const RunConfig& config) const;

  /// Renders the reader template over (context, F (+) Q, options) and
  /// extracts the choice. context == nullptr is the non-retrieval mode.
  AnswerRecord answer(const QASample& sample, const RetrievedContext* context,
                      const RunConfig& config) const;

  const DenseRetriever& retriever() const { return retriever_; }
  LlmGateway& gateway() const { return gateway_; }

 private:
  const DenseRetriever& retriever_;
  LlmGateway& gateway_;
};

nlohmann::ordered_json trace_to_json(const PipelineTrace& trace);
nlohmann::ordered_json answer_to_json(const AnswerRecord& rec);

}  // namespace rgar
