#include "rgar/eval.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "rgar/text.hpp"

namespace rgar {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Method m) {
  switch (m) {
    case Method::custom: return "custom";
    case Method::cot: return "cot";
    case Method::rag: return "rag";
    case Method::gar: return "gar";
    case Method::rgar: return "rgar";
  }
  return "rgar";
}

Method method_from_string(const std::string& name) {
  if (name == "custom") return Method::custom;
  if (name == "cot") return Method::cot;
  if (name == "rag") return Method::rag;
  if (name == "gar") return Method::gar;
  if (name == "rgar") return Method::rgar;
  throw std::invalid_argument("unknown method '" + name + "'");
}

QASample sample_from_json(const json& rec) {
  if (!rec.is_object()) throw std::invalid_argument("record is not an object");
  QASample s;
  if (!rec.contains("question") || !rec["question"].is_string()) {
    throw std::invalid_argument("missing string field 'question'");
  }
  s.question = rec["question"].get<std::string>();
  if (rec.contains("id")) {
    s.id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
  }
  if (rec.contains("ehr") && rec["ehr"].is_string()) s.ehr = rec["ehr"].get<std::string>();
  if (!rec.contains("options") || !rec["options"].is_object()) {
    throw std::invalid_argument("missing object field 'options'");
  }
  for (const auto& [letter, text] : rec["options"].items()) {
    if (!text.is_string()) throw std::invalid_argument("option '" + letter + "' is not a string");
    s.options[letter] = text.get<std::string>();
  }
  if (rec.contains("answer") && rec["answer"].is_string()) {
    s.gold = rec["answer"].get<std::string>();
  }
  validate_sample(s);
  return s;
}

std::vector<QASample> load_dataset(const std::string& path, bool require_gold) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset file not found: " + path);
  std::vector<QASample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed record");
    }
    QASample s;
    try {
      s = sample_from_json(rec);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (s.id.empty()) s.id = "line" + std::to_string(line_no);
    if (require_gold && s.gold.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": missing 'answer' (gold) in eval mode");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

DatasetStats dataset_stats(const std::vector<QASample>& samples) {
  if (samples.empty()) throw std::invalid_argument("dataset_stats: empty dataset");
  DatasetStats st;
  st.count = samples.size();
  std::size_t total = 0;
  st.min_tokens = static_cast<std::size_t>(-1);
  for (const QASample& s : samples) {
    const std::size_t len = count_ws_tokens(s.question) + count_ws_tokens(s.ehr);
    total += len;
    st.max_tokens = std::max(st.max_tokens, len);
    st.min_tokens = std::min(st.min_tokens, len);
  }
  st.avg_tokens = static_cast<double>(total) / static_cast<double>(samples.size());
  return st;
}

namespace {

SampleResult run_one(const QASample& sample, const MethodSpec& spec,
                     const DenseRetriever* retriever, LlmGateway& gateway) {
  SampleResult r;
  r.id = sample.id;
  r.gold = sample.gold;
  r.context_token_len = count_ws_tokens(sample.question) + count_ws_tokens(sample.ehr);

  RunConfig cfg = spec.config;
  AnswerRecord ans;
  try {
    switch (spec.method) {
      case Method::custom: {
        cfg.reader_style = ReaderStyle::plain;
        Pipeline p(*retriever, gateway);  // retriever unused for null context
        ans = p.answer(sample, nullptr, cfg);
        break;
      }
      case Method::cot: {
        cfg.reader_style = ReaderStyle::cot;
        Pipeline p(*retriever, gateway);
        ans = p.answer(sample, nullptr, cfg);
        break;
      }
      case Method::rag: {
        const std::string ehr = truncate_ws_tokens(sample.ehr, cfg.ehr_token_budget);
        RetrievedContext ctx =
            retriever->top_n(build_basic_query(sample.question, ehr), cfg.n_retrieve);
        Pipeline p(*retriever, gateway);
        ans = p.answer(sample, &ctx, cfg);
        break;
      }
      case Method::gar:
        cfg.rounds = 0;
        [[fallthrough]];
      case Method::rgar: {
        Pipeline p(*retriever, gateway);
        PipelineTrace trace = p.run_rgar(sample, cfg);
        ans = trace.answer;
        if (!trace.error.empty()) {
          log_warn("sample '" + sample.id + "' failed: " + trace.error);
        }
        break;
      }
    }
  } catch (const std::exception& e) {
    log_warn("sample '" + sample.id + "' failed: " + std::string(e.what()));
    ans = AnswerRecord{};
  }

  r.choice = ans.choice;
  r.method = ans.method;
  r.failed = ans.choice.empty();
  r.correct = !ans.choice.empty() && !sample.gold.empty() && ans.choice == sample.gold;
  return r;
}

// The non-retrieval methods never touch the retriever, but Pipeline holds a
// reference; give them an inert one.
class NullEncoder final : public EmbeddingProvider {
 public:
  std::size_t dim() const override { return 1; }
  std::string tag() const override { return "null"; }
  std::vector<float> embed_text(const std::string&) override {
    throw std::logic_error("null encoder cannot embed");
  }
};

struct NullRetrieverBox {
  CorpusStore corpus{std::vector<Chunk>{{"null", "", "null", 0}}};
  EmbeddingMatrix matrix;
  NullEncoder encoder;
  DenseRetriever retriever;
  NullRetrieverBox()
      : matrix{{"null"}, 1, "null", {0.0f}},
        retriever(corpus, matrix, encoder, RetrieverOptions{}) {}
};

}  // namespace

EvalReport evaluate(const std::vector<QASample>& samples, const MethodSpec& spec,
                    const DenseRetriever* retriever, LlmGateway& gateway, std::size_t workers,
                    const std::string& dataset_name) {
  const bool needs_retrieval =
      spec.method == Method::rag || spec.method == Method::gar || spec.method == Method::rgar;
  if (needs_retrieval && retriever == nullptr) {
    throw std::invalid_argument(std::string("method '") + to_string(spec.method) +
                                "' requires a retrieval index");
  }
  static NullRetrieverBox null_box;
  const DenseRetriever* effective = retriever ? retriever : &null_box.retriever;

  EvalReport report;
  report.method = to_string(spec.method);
  report.dataset = dataset_name;
  report.total = samples.size();
  report.per_sample.resize(samples.size());

  workers = std::max<std::size_t>(1, std::min(workers, samples.size() ? samples.size() : 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      report.per_sample[i] = run_one(samples[i], spec, effective, gateway);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= samples.size()) return;
        report.per_sample[i] = run_one(samples[i], spec, effective, gateway);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::sort(report.per_sample.begin(), report.per_sample.end(),
            [](const SampleResult& a, const SampleResult& b) { return a.id < b.id; });
  for (const SampleResult& r : report.per_sample) {
    if (r.correct) ++report.correct;
    if (r.failed) ++report.failures;
  }
  report.accuracy = report.total == 0
                        ? 0.0
                        : static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

std::vector<LengthBin> length_bin_report(const EvalReport& report, std::size_t bins) {
  if (report.per_sample.empty()) throw std::invalid_argument("length_bin_report: empty report");
  if (bins == 0) throw std::invalid_argument("length_bin_report: bins must be >= 1");
  bins = std::min(bins, report.per_sample.size());

  std::vector<const SampleResult*> sorted;
  sorted.reserve(report.per_sample.size());
  for (const auto& r : report.per_sample) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const SampleResult* a, const SampleResult* b) {
    if (a->context_token_len != b->context_token_len) {
      return a->context_token_len < b->context_token_len;
    }
    return a->id < b->id;
  });

  const std::size_t n = sorted.size();
  const std::size_t base = n / bins;
  const std::size_t remainder = n % bins;

  std::vector<LengthBin> out;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t size = base + (b < remainder ? 1 : 0);
    LengthBin bin;
    bin.count = size;
    bin.min_len = sorted[pos]->context_token_len;
    bin.max_len = sorted[pos + size - 1]->context_token_len;
    for (std::size_t i = pos; i < pos + size; ++i) {
      if (sorted[i]->correct) ++bin.correct;
    }
    bin.accuracy = static_cast<double>(bin.correct) / static_cast<double>(size);
    out.push_back(bin);
    pos += size;
  }
  return out;
}

void write_report(const EvalReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);

  ordered_json summary;
  summary["method"] = report.method;
  summary["dataset"] = report.dataset;
  summary["total"] = report.total;
  summary["correct"] = report.correct;
  summary["failures"] = report.failures;
  summary["accuracy"] = report.accuracy;
  {
    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "per_sample.jsonl", std::ios::binary);
    for (const SampleResult& r : report.per_sample) {
      ordered_json rec;
      rec["id"] = r.id;
      if (r.choice.empty()) {
        rec["choice"] = nullptr;
      } else {
        rec["choice"] = r.choice;
      }
      rec["gold"] = r.gold;
      rec["correct"] = r.correct;
      rec["failed"] = r.failed;
      rec["extraction_method"] = to_string(r.method);
      rec["context_token_len"] = r.context_token_len;
      out << rec.dump() << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "lengths.csv", std::ios::binary);
    out << "id,context_token_len,correct\n";
    for (const SampleResult& r : report.per_sample) {
      out << r.id << "," << r.context_token_len << "," << (r.correct ? 1 : 0) << "\n";
    }
  }
  if (!report.per_sample.empty()) {
    std::ofstream out(fs::path(out_dir) / "length_bins.csv", std::ios::binary);
    out << "bin,count,correct,accuracy,min_len,max_len\n";
    const auto bins = length_bin_report(report, std::min<std::size_t>(4, report.per_sample.size()));
    for (std::size_t b = 0; b < bins.size(); ++b) {
      out << b << "," << bins[b].count << "," << bins[b].correct << "," << bins[b].accuracy << ","
          << bins[b].min_len << "," << bins[b].max_len << "\n";
    }
  }
}

}  // namespace rgar
