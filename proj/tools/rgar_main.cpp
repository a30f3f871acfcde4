// Command-line entry point wiring ingest/embed/retrieve/answer/eval/ablate/
// stats/serve onto the library.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <thread>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rgar/config.hpp"
#include "rgar/corpus.hpp"
#include "rgar/embedding.hpp"
#include "rgar/eval.hpp"
#include "rgar/llm.hpp"
#include "rgar/pipeline.hpp"
#include "rgar/retriever.hpp"
#include "rgar/serve.hpp"
#include "rgar/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Run configuration: built-in defaults, overridden by a flat key=value config
// file, overridden by explicit flags.

struct CliOptions {
  std::string config_path;
  long rounds = -1;
  long n = -1;
  std::string fusion;      // "single" | "fused" | "gar" (alias for fused)
  std::string domain;      // "full" | "pooled"
  long pool = -1;
  std::string reader;      // "plain" | "cot"
  bool prepend_question = false;
  std::string extraction;  // "single_stage" | "two_stage"
  long ehr_budget = -1;
};

void add_config_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--config", o.config_path, "flat key=value config file");
  cmd->add_option("--rounds", o.rounds, "recurrence rounds (default 2)");
  cmd->add_option("--n", o.n, "chunks to retrieve (default 32)");
  cmd->add_option("--fusion", o.fusion, "single|fused (gar = fused)");
  cmd->add_option("--domain", o.domain, "softmax domain: full|pooled");
  cmd->add_option("--pool", o.pool, "pool size K for pooled domain");
  cmd->add_option("--reader", o.reader, "reader style: plain|cot");
  cmd->add_flag("--prepend-question", o.prepend_question,
                "prepend the basic query to each expanded query");
  cmd->add_option("--extraction", o.extraction, "single_stage|two_stage");
  cmd->add_option("--ehr-budget", o.ehr_budget, "EHR whitespace-token budget (0 = unlimited)");
}

rgar::FusionMode parse_fusion(const std::string& v) {
  if (v == "single") return rgar::FusionMode::single;
  if (v == "fused" || v == "gar") return rgar::FusionMode::fused;
  throw std::runtime_error("expected fusion single|fused|gar, got '" + v + "'");
}

rgar::RunConfig resolve_config(const CliOptions& o) {
  rgar::RunConfigOverrides ov;
  if (o.rounds >= 0) ov.rounds = static_cast<std::size_t>(o.rounds);
  if (o.n >= 0) ov.n_retrieve = static_cast<std::size_t>(o.n);
  if (!o.fusion.empty()) ov.fusion_mode = parse_fusion(o.fusion);
  if (!o.domain.empty()) {
    ov.domain_kind = o.domain == "pooled" ? rgar::NormDomainKind::pooled
                                          : rgar::NormDomainKind::full_corpus;
  }
  if (o.pool >= 0) ov.k_pool = static_cast<std::size_t>(o.pool);
  if (!o.reader.empty()) {
    ov.reader_style = o.reader == "cot" ? rgar::ReaderStyle::cot : rgar::ReaderStyle::plain;
  }
  if (o.prepend_question) ov.prepend_question = true;
  if (!o.extraction.empty()) {
    ov.extraction_mode = o.extraction == "two_stage" ? rgar::ExtractionMode::two_stage
                                                     : rgar::ExtractionMode::single_stage;
  }
  if (o.ehr_budget >= 0) ov.ehr_token_budget = static_cast<std::size_t>(o.ehr_budget);
  return rgar::resolve_run_config(o.config_path, ov);
}

// ---------------------------------------------------------------------------
// Providers and backends.

struct ProviderOptions {
  std::string provider = "mock";  // mock | remote | file
  long dim = 8;
  unsigned long long seed = 0;
  bool no_normalize = false;
  std::string endpoint;
  std::string model;
  std::string vectors_file;  // provider=file
  bool given = false;
};

void add_provider_flags(CLI::App* cmd, ProviderOptions& p) {
  cmd->add_option("--provider", p.provider, "embedding provider: mock|remote|file")
      ->each([&p](const std::string&) { p.given = true; });
  cmd->add_option("--dim", p.dim, "embedding dimension (mock/remote)");
  cmd->add_option("--seed", p.seed, "mock embedder seed");
  cmd->add_flag("--no-normalize", p.no_normalize, "skip L2 normalization at embed time");
  cmd->add_option("--endpoint", p.endpoint, "embeddings endpoint URL (remote)");
  cmd->add_option("--model", p.model, "embedding model name (remote)");
  cmd->add_option("--vectors", p.vectors_file, "precomputed vector file (provider=file)");
}

std::unique_ptr<rgar::EmbeddingProvider> make_provider(const ProviderOptions& p) {
  if (p.provider == "mock") {
    return std::make_unique<rgar::MockEmbedder>(static_cast<std::size_t>(p.dim), p.seed,
                                                !p.no_normalize);
  }
  if (p.provider == "remote") {
    rgar::RemoteEmbedderConfig cfg;
    cfg.endpoint = p.endpoint;
    if (cfg.endpoint.empty()) {
      if (const char* e = std::getenv("RGAR_EMBED_ENDPOINT")) cfg.endpoint = e;
    }
    cfg.model = p.model;
    if (cfg.model.empty()) {
      if (const char* m = std::getenv("RGAR_EMBED_MODEL")) cfg.model = m;
    }
    if (const char* k = std::getenv("RGAR_API_KEY")) cfg.api_key = k;
    cfg.dim = static_cast<std::size_t>(p.dim);
    cfg.l2_normalize = !p.no_normalize;
    return std::make_unique<rgar::RemoteEmbedder>(cfg);
  }
  throw std::runtime_error("provider '" + p.provider + "' cannot encode query text");
}

// Rebuilds a query encoder from a cache tag like "mock-8-s42-raw".
std::unique_ptr<rgar::EmbeddingProvider> provider_from_tag(const std::string& tag) {
  if (tag.rfind("mock-", 0) != 0) return nullptr;
  std::string rest = tag.substr(5);
  bool normalize = true;
  if (rest.size() >= 4 && rest.substr(rest.size() - 4) == "-raw") {
    normalize = false;
    rest = rest.substr(0, rest.size() - 4);
  }
  unsigned long long seed = 0;
  if (auto s = rest.find("-s"); s != std::string::npos) {
    seed = std::stoull(rest.substr(s + 2));
    rest = rest.substr(0, s);
  }
  return std::make_unique<rgar::MockEmbedder>(std::stoull(rest), seed, normalize);
}

struct IndexBundle {
  rgar::CorpusStore corpus;
  rgar::EmbeddingMatrix matrix;
  std::unique_ptr<rgar::EmbeddingProvider> encoder;
};

IndexBundle load_index(const std::string& index_dir, const ProviderOptions& provider_opts,
                       const rgar::RunConfig& cfg) {
  IndexBundle b;
  b.corpus = rgar::CorpusStore::load_dir(index_dir);
  b.matrix = rgar::load_matrix((fs::path(index_dir) / "embeddings.bin").string());
  if (provider_opts.given && provider_opts.provider != "file") {
    b.encoder = make_provider(provider_opts);
  } else {
    b.encoder = provider_from_tag(b.matrix.provider_tag);
    if (!b.encoder) {
      throw std::runtime_error("cannot reconstruct a query encoder from tag '" +
                               b.matrix.provider_tag +
                               "'; pass --provider remote with endpoint settings");
    }
  }
  if (b.encoder->tag() != b.matrix.provider_tag) {
    rgar::log_warn("query encoder tag '" + b.encoder->tag() + "' differs from cache tag '" +
                   b.matrix.provider_tag + "'");
  }
  (void)cfg;
  return b;
}

rgar::RetrieverOptions retriever_options(const rgar::RunConfig& cfg, bool serial) {
  rgar::RetrieverOptions opts;
  opts.parallel = !serial;
  opts.domain = cfg.normalization_domain;
  return opts;
}

struct BackendOptions {
  std::string backend = "scripted";  // scripted | remote
  std::string script_path;
  std::string chat_endpoint;
  std::string chat_model;
  std::string prompts_dir;
};

void add_backend_flags(CLI::App* cmd, BackendOptions& b) {
  cmd->add_option("--backend", b.backend, "LLM backend: scripted|remote");
  cmd->add_option("--script", b.script_path, "scripted backend JSON script file");
  cmd->add_option("--chat-endpoint", b.chat_endpoint, "chat completions endpoint URL");
  cmd->add_option("--chat-model", b.chat_model, "chat model name");
  cmd->add_option("--prompts", b.prompts_dir, "directory of prompt template overrides");
}

rgar::LlmGateway make_gateway(const BackendOptions& b) {
  rgar::PromptRegistry registry = rgar::PromptRegistry::builtin();
  if (!b.prompts_dir.empty()) registry.load_dir(b.prompts_dir);
  std::shared_ptr<rgar::ChatBackend> backend;
  if (b.backend == "scripted") {
    if (b.script_path.empty()) {
      throw std::runtime_error("--backend scripted requires --script <file>");
    }
    backend = rgar::scripted_backend_from_file(b.script_path);
  } else if (b.backend == "remote") {
    rgar::RemoteChatConfig cfg = rgar::remote_chat_config_from_env();
    if (!b.chat_endpoint.empty()) cfg.endpoint = b.chat_endpoint;
    if (!b.chat_model.empty()) cfg.model = b.chat_model;
    backend = std::make_shared<rgar::RemoteChatBackend>(cfg);
  } else {
    throw std::runtime_error("unknown backend '" + b.backend + "'");
  }
  return rgar::LlmGateway(std::move(backend), std::move(registry));
}

rgar::QASample load_single_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sample file not found: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json rec = json::parse(content, nullptr, false);
  if (rec.is_discarded()) {
    // fall back to the first non-empty JSONL line
    std::istringstream ss(content);
    std::string line;
    while (std::getline(ss, line)) {
      if (rgar::trim(line).empty()) continue;
      rec = json::parse(line, nullptr, false);
      break;
    }
  }
  if (rec.is_discarded()) throw std::runtime_error("sample file is not valid JSON: " + path);
  rgar::QASample s = rgar::sample_from_json(rec);
  if (s.id.empty()) s.id = "sample";
  return s;
}

std::atomic<bool> g_stop{false};
void handle_sigint(int) { g_stop.store(true); }

std::vector<std::size_t> parse_sweep_values(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw std::runtime_error("empty sweep value list: " + list);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGAR: recurrence generation-augmented retrieval"};
  app.require_subcommand(1);

  int exit_code = 0;

  // --- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "load a chunked corpus into an index directory");
  std::string ingest_corpus, ingest_out;
  ingest->add_option("--corpus", ingest_corpus, "line-delimited corpus file")->required();
  ingest->add_option("--out", ingest_out, "index directory")->required();
  ingest->callback([&]() {
    rgar::CorpusStore store = rgar::CorpusStore::ingest_file(ingest_corpus);
    store.save_dir(ingest_out);
    const rgar::CorpusStats& st = store.stats();
    std::printf("ingested %zu chunks (tokens min %zu / avg %.2f / max %zu) -> %s\n",
                st.chunk_count, st.min_tokens, st.avg_tokens, st.max_tokens, ingest_out.c_str());
  });

  // --- embed -----------------------------------------------------------
  auto* embed = app.add_subcommand("embed", "materialize corpus embeddings into the index");
  std::string embed_index, embed_cache;
  bool embed_resume = false;
  ProviderOptions embed_provider;
  embed->add_option("--index", embed_index, "index directory")->required();
  embed->add_option("--cache", embed_cache, "cache path (default <index>/embeddings.bin)");
  embed->add_flag("--resume", embed_resume, "keep completed rows on failure and resume");
  add_provider_flags(embed, embed_provider);
  embed->callback([&]() {
    rgar::CorpusStore store = rgar::CorpusStore::load_dir(embed_index);
    const std::string cache = embed_cache.empty()
                                  ? (fs::path(embed_index) / "embeddings.bin").string()
                                  : embed_cache;
    if (embed_provider.provider == "file") {
      if (embed_provider.vectors_file.empty()) {
        throw std::runtime_error("--provider file requires --vectors <path>");
      }
      rgar::EmbeddingMatrix m = rgar::load_matrix(embed_provider.vectors_file);
      std::vector<std::string> want;
      for (const auto& c : store.chunks()) want.push_back(c.id);
      if (m.chunk_ids != want) {
        throw std::runtime_error("vector file ids do not match the corpus");
      }
      rgar::save_matrix(m, cache);
      std::printf("installed %zu precomputed vectors (dim %zu, tag %s) -> %s\n", m.count(),
                  m.dim, m.provider_tag.c_str(), cache.c_str());
      return;
    }
    auto provider = make_provider(embed_provider);
    rgar::EmbeddingMatrix m = rgar::embed_corpus(store, *provider, cache, embed_resume);
    std::printf("embedded %zu chunks (dim %zu, tag %s) -> %s\n", m.count(), m.dim,
                m.provider_tag.c_str(), cache.c_str());
  });

  // --- retrieve ---------------------------------------------------------
  auto* retrieve = app.add_subcommand("retrieve", "rank chunks for a query");
  std::string retrieve_index, retrieve_query;
  bool retrieve_serial = false;
  CliOptions retrieve_cli;
  ProviderOptions retrieve_provider;
  BackendOptions retrieve_backend;
  retrieve->add_option("--index", retrieve_index, "index directory")->required();
  retrieve->add_option("--query", retrieve_query, "query text")->required();
  retrieve->add_flag("--serial", retrieve_serial, "use the serial scoring kernel");
  add_config_flags(retrieve, retrieve_cli);
  add_provider_flags(retrieve, retrieve_provider);
  add_backend_flags(retrieve, retrieve_backend);
  retrieve->callback([&]() {
    rgar::RunConfig cfg = resolve_config(retrieve_cli);
    IndexBundle bundle = load_index(retrieve_index, retrieve_provider, cfg);
    rgar::DenseRetriever retriever(bundle.corpus, bundle.matrix, *bundle.encoder,
                                   retriever_options(cfg, retrieve_serial));
    rgar::RetrievedContext ctx;
    if (!retrieve_cli.fusion.empty() && cfg.fusion_mode == rgar::FusionMode::fused) {
      rgar::LlmGateway gateway = make_gateway(retrieve_backend);
      rgar::QuerySet qs = rgar::generate_expanded_queries(retrieve_query, gateway, 0);
      ctx = retriever.retrieve_fused(qs, cfg.n_retrieve, cfg.prepend_question);
    } else {
      ctx = retriever.top_n(retrieve_query, cfg.n_retrieve);
    }
    for (std::size_t i = 0; i < ctx.entries.size(); ++i) {
      nlohmann::ordered_json rec;
      rec["rank"] = i + 1;
      rec["chunk_id"] = ctx.entries[i].chunk_id;
      rec["score"] = ctx.entries[i].score;
      std::cout << rec.dump() << "\n";
    }
  });

  // --- answer -----------------------------------------------------------
  auto* answer = app.add_subcommand("answer", "run the full pipeline on one sample");
  std::string answer_index, answer_sample, answer_trace_out;
  bool answer_serial = false;
  CliOptions answer_cli;
  ProviderOptions answer_provider;
  BackendOptions answer_backend;
  answer->add_option("--index", answer_index, "index directory")->required();
  answer->add_option("--sample", answer_sample, "sample record file (JSON or JSONL)")->required();
  answer->add_option("--out", answer_trace_out, "trace output file (default <sample id>.trace.json)");
  answer->add_flag("--serial", answer_serial, "use the serial scoring kernel");
  add_config_flags(answer, answer_cli);
  add_provider_flags(answer, answer_provider);
  add_backend_flags(answer, answer_backend);
  answer->callback([&]() {
    rgar::RunConfig cfg = resolve_config(answer_cli);
    IndexBundle bundle = load_index(answer_index, answer_provider, cfg);
    rgar::DenseRetriever retriever(bundle.corpus, bundle.matrix, *bundle.encoder,
                                   retriever_options(cfg, answer_serial));
    rgar::LlmGateway gateway = make_gateway(answer_backend);
    rgar::QASample sample = load_single_sample(answer_sample);
    rgar::Pipeline pipeline(retriever, gateway);
    rgar::PipelineTrace trace = pipeline.run_rgar(sample, cfg);

    const std::string trace_path =
        answer_trace_out.empty() ? sample.id + ".trace.json" : answer_trace_out;
    std::ofstream out(trace_path, std::ios::binary);
    out << rgar::trace_to_json(trace).dump(2) << "\n";
    std::cout << rgar::answer_to_json(trace.answer).dump() << "\n";
    if (!trace.error.empty()) {
      std::cerr << "sample failed: " << trace.error << "\n";
      exit_code = 1;
    }
  });

  // --- eval --------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate a method over a dataset");
  std::string eval_index, eval_dataset, eval_out, eval_method = "rgar";
  long eval_workers = 4;
  bool eval_serial = false;
  CliOptions eval_cli;
  ProviderOptions eval_provider;
  BackendOptions eval_backend;
  eval->add_option("--index", eval_index, "index directory (required for rag/gar/rgar)");
  eval->add_option("--dataset", eval_dataset, "line-delimited QA dataset")->required();
  eval->add_option("--method", eval_method, "custom|cot|rag|gar|rgar");
  eval->add_option("--out", eval_out, "report output directory");
  eval->add_option("--workers", eval_workers, "sample worker threads");
  eval->add_flag("--serial", eval_serial, "use the serial scoring kernel");
  add_config_flags(eval, eval_cli);
  add_provider_flags(eval, eval_provider);
  add_backend_flags(eval, eval_backend);
  eval->callback([&]() {
    rgar::MethodSpec spec;
    spec.method = rgar::method_from_string(eval_method);
    spec.config = resolve_config(eval_cli);
    rgar::LlmGateway gateway = make_gateway(eval_backend);
    std::vector<rgar::QASample> samples = rgar::load_dataset(eval_dataset, true);

    std::unique_ptr<IndexBundle> bundle;
    std::unique_ptr<rgar::DenseRetriever> retriever;
    if (!eval_index.empty()) {
      bundle = std::make_unique<IndexBundle>(
          load_index(eval_index, eval_provider, spec.config));
      retriever = std::make_unique<rgar::DenseRetriever>(
          bundle->corpus, bundle->matrix, *bundle->encoder,
          retriever_options(spec.config, eval_serial));
    }
    rgar::EvalReport report =
        rgar::evaluate(samples, spec, retriever.get(), gateway,
                       static_cast<std::size_t>(std::max(1L, eval_workers)),
                       fs::path(eval_dataset).filename().string());
    std::printf("method=%s dataset=%s total=%zu correct=%zu accuracy=%.4f failures=%zu\n",
                report.method.c_str(), report.dataset.c_str(), report.total, report.correct,
                report.accuracy, report.failures);
    if (!eval_out.empty()) {
      rgar::write_report(report, eval_out);
      std::printf("report written to %s\n", eval_out.c_str());
    }
  });

  // --- ablate -------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "sweep config axes and tabulate accuracy");
  std::string ablate_index, ablate_dataset, ablate_out = "ablation", ablate_method = "rgar";
  long ablate_workers = 4;
  std::vector<std::string> ablate_sweeps;
  CliOptions ablate_cli;
  ProviderOptions ablate_provider;
  BackendOptions ablate_backend;
  ablate->add_option("--index", ablate_index, "index directory")->required();
  ablate->add_option("--dataset", ablate_dataset, "line-delimited QA dataset")->required();
  ablate->add_option("--method", ablate_method, "method to sweep (default rgar)");
  ablate->add_option("--sweep", ablate_sweeps, "axis as key=v1,v2,... (keys: n, rounds, k_pool)")
      ->required();
  ablate->add_option("--out", ablate_out, "output directory");
  ablate->add_option("--workers", ablate_workers, "sample worker threads");
  add_config_flags(ablate, ablate_cli);
  add_provider_flags(ablate, ablate_provider);
  add_backend_flags(ablate, ablate_backend);
  ablate->callback([&]() {
    rgar::RunConfig base = resolve_config(ablate_cli);
    rgar::LlmGateway gateway = make_gateway(ablate_backend);
    std::vector<rgar::QASample> samples = rgar::load_dataset(ablate_dataset, true);
    IndexBundle bundle = load_index(ablate_index, ablate_provider, base);
    rgar::DenseRetriever retriever(bundle.corpus, bundle.matrix, *bundle.encoder,
                                   retriever_options(base, false));

    std::vector<std::pair<std::string, std::vector<std::size_t>>> axes;
    for (const std::string& sweep : ablate_sweeps) {
      auto eq = sweep.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad --sweep '" + sweep + "'");
      const std::string key = sweep.substr(0, eq);
      if (key != "n" && key != "rounds" && key != "k_pool") {
        throw std::runtime_error("unsupported sweep key '" + key + "'");
      }
      axes.emplace_back(key, parse_sweep_values(sweep.substr(eq + 1)));
    }

    fs::create_directories(ablate_out);
    std::ofstream csv(fs::path(ablate_out) / "ablation.csv", std::ios::binary);
    csv << "method,n,rounds,k_pool,total,correct,accuracy,failures\n";

    std::vector<std::size_t> cursor(axes.size(), 0);
    while (true) {
      rgar::MethodSpec spec;
      spec.method = rgar::method_from_string(ablate_method);
      spec.config = base;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const std::size_t v = axes[a].second[cursor[a]];
        if (axes[a].first == "n") spec.config.n_retrieve = v;
        if (axes[a].first == "rounds") spec.config.rounds = v;
        if (axes[a].first == "k_pool") spec.config.normalization_domain.k_pool = v;
      }
      rgar::EvalReport r =
          rgar::evaluate(samples, spec, &retriever, gateway,
                         static_cast<std::size_t>(std::max(1L, ablate_workers)),
                         fs::path(ablate_dataset).filename().string());
      csv << r.method << "," << spec.config.n_retrieve << "," << spec.config.rounds << ","
          << spec.config.normalization_domain.k_pool << "," << r.total << "," << r.correct << ","
          << r.accuracy << "," << r.failures << "\n";
      std::printf("n=%zu rounds=%zu k_pool=%zu accuracy=%.4f\n", spec.config.n_retrieve,
                  spec.config.rounds, spec.config.normalization_domain.k_pool, r.accuracy);

      std::size_t a = 0;
      for (; a < axes.size(); ++a) {
        if (++cursor[a] < axes[a].second.size()) break;
        cursor[a] = 0;
      }
      if (a == axes.size()) break;
    }
    std::printf("sweep written to %s/ablation.csv\n", ablate_out.c_str());
  });

  // --- stats ---------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "dataset length statistics");
  std::string stats_dataset, stats_csv;
  stats->add_option("--dataset", stats_dataset, "line-delimited QA dataset")->required();
  stats->add_option("--csv", stats_csv, "write per-sample lengths CSV");
  stats->callback([&]() {
    std::vector<rgar::QASample> samples = rgar::load_dataset(stats_dataset, false);
    rgar::DatasetStats st = rgar::dataset_stats(samples);
    std::printf("samples %zu\n", st.count);
    std::printf("%-10s %-10s %-10s\n", "max_len", "avg_len", "min_len");
    std::printf("%-10zu %-10.1f %-10zu\n", st.max_tokens, st.avg_tokens, st.min_tokens);
    if (!stats_csv.empty()) {
      std::ofstream out(stats_csv, std::ios::binary);
      out << "id,context_token_len\n";
      for (const auto& s : samples) {
        out << s.id << ","
            << rgar::count_ws_tokens(s.question) + rgar::count_ws_tokens(s.ehr) << "\n";
      }
      std::printf("per-sample lengths written to %s\n", stats_csv.c_str());
    }
  });

  // --- serve -----------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "test-only HTTP endpoint: POST /answer");
  std::string serve_index, serve_host = "127.0.0.1";
  int serve_port = 8080;
  bool serve_serial = false;
  CliOptions serve_cli;
  ProviderOptions serve_provider;
  BackendOptions serve_backend;
  serve->add_option("--index", serve_index, "index directory")->required();
  serve->add_option("--port", serve_port, "listen port");
  serve->add_option("--host", serve_host, "bind host");
  serve->add_flag("--serial", serve_serial, "use the serial scoring kernel");
  add_config_flags(serve, serve_cli);
  add_provider_flags(serve, serve_provider);
  add_backend_flags(serve, serve_backend);
  serve->callback([&]() {
    rgar::RunConfig cfg = resolve_config(serve_cli);
    IndexBundle bundle = load_index(serve_index, serve_provider, cfg);
    rgar::DenseRetriever retriever(bundle.corpus, bundle.matrix, *bundle.encoder,
                                   retriever_options(cfg, serve_serial));
    rgar::LlmGateway gateway = make_gateway(serve_backend);
    rgar::AnswerServer server(retriever, gateway, cfg);
    const int port = server.start(serve_host, serve_port);
    std::printf("serving POST /answer on %s:%d (Ctrl-C to stop)\n", serve_host.c_str(), port);
    std::signal(SIGINT, handle_sigint);
    std::signal(SIGTERM, handle_sigint);
    while (!g_stop.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
