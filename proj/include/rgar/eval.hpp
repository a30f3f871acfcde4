#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rgar/pipeline.hpp"

namespace rgar {

enum class Method { custom, cot, rag, gar, rgar };
const char* to_string(Method m);
Method method_from_string(const std::string& name);

/// custom/cot answer without retrieval; rag scores the basic query alone;
/// gar is the recurrence with rounds forced to 0; rgar runs rounds >= 1.
struct MethodSpec {
  Method method = Method::rgar;
  RunConfig config;
};

struct SampleResult {
  std::string id;
  std::string choice;  // empty = none
  std::string gold;
  bool correct = false;
  bool failed = false;  // no extractable choice or a pipeline error
  ChoiceMethod method = ChoiceMethod::failed;
  std::size_t context_token_len = 0;  // ws tokens of question (+) ehr
};

struct EvalReport {
  std::string method;
  std::string dataset;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t failures = 0;
  double accuracy = 0.0;
  std::vector<SampleResult> per_sample;  // sorted by sample id
};

/// Line-delimited records {"id", "question", "ehr"?, "options": {"A": ...},
/// "answer"?}. Malformed records are reported with their line number.
std::vector<QASample> load_dataset(const std::string& path, bool require_gold = true);

QASample sample_from_json(const nlohmann::json& rec);

struct DatasetStats {
  std::size_t count = 0;
  std::size_t max_tokens = 0;
  std::size_t min_tokens = 0;
  double avg_tokens = 0.0;
};

DatasetStats dataset_stats(const std::vector<QASample>& samples);

/// Runs every sample through the method's pipeline variant. retriever may be
/// null for the non-retrieval methods; retrieval methods throw without one.
/// Samples with no extractable answer score incorrect. Worker threads share
/// only immutable state; results are re-sorted by id.
EvalReport evaluate(const std::vector<QASample>& samples, const MethodSpec& spec,
                    const DenseRetriever* retriever, LlmGateway& gateway,
                    std::size_t workers = 1, const std::string& dataset_name = "");

struct LengthBin {
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::size_t min_len = 0;
  std::size_t max_len = 0;
};

/// Sorts per-sample results by context length ascending and splits them into
/// equal bins (remainder spread over the earlier bins).
std::vector<LengthBin> length_bin_report(const EvalReport& report, std::size_t bins = 4);

/// summary.json, per_sample.jsonl, lengths.csv, length_bins.csv.
void write_report(const EvalReport& report, const std::string& out_dir);

}  // namespace rgar
