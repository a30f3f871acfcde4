#include "rgar/retriever.hpp"

#include <algorithm>
#include <stdexcept>

#include "rgar/score_kernel.hpp"
#include "rgar/text.hpp"

namespace rgar {

const char* to_string(FusionMode m) {
  return m == FusionMode::single ? "single" : "fused";
}

std::string NormDomain::to_string() const {
  if (kind == NormDomainKind::full_corpus) return "full_corpus";
  return "pooled(" + std::to_string(k_pool) + ")";
}

DenseRetriever::DenseRetriever(const CorpusStore& corpus, const EmbeddingMatrix& matrix,
                               EmbeddingProvider& query_encoder, RetrieverOptions opts)
    : corpus_(corpus), matrix_(matrix), encoder_(query_encoder), opts_(opts) {
  if (matrix_.count() != corpus_.size()) {
    throw std::invalid_argument("embedding matrix row count does not match corpus size");
  }
  if (encoder_.dim() != matrix_.dim) {
    throw std::invalid_argument("query encoder dim " + std::to_string(encoder_.dim()) +
                                " does not match matrix dim " + std::to_string(matrix_.dim));
  }
}

double DenseRetriever::similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("similarity: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

std::vector<float> DenseRetriever::encode_query(const std::string& text) const {
  std::vector<float> v = encoder_.embed_text(text);
  if (v.size() != matrix_.dim) {
    throw std::runtime_error("query embedding dim does not match matrix dim");
  }
  return v;
}

RetrievedContext DenseRetriever::select_top(const std::vector<double>& scores,
                                            std::size_t n) const {
  auto top = kernel::top_k_desc(scores.data(), scores.size(), n);
  RetrievedContext ctx;
  ctx.n_requested = n;
  ctx.normalization_domain = opts_.domain;
  ctx.entries.reserve(top.size());
  for (std::uint32_t idx : top) {
    ctx.entries.push_back({matrix_.chunk_ids[idx], scores[idx]});
  }
  return ctx;
}

RetrievedContext DenseRetriever::top_n(const std::string& query_text, std::size_t n) const {
  if (n < 1) throw std::invalid_argument("top_n: n must be >= 1");
  if (corpus_.empty()) throw std::runtime_error("top_n: corpus is empty");
  const std::vector<float> q = encode_query(query_text);
  std::vector<double> sims(matrix_.count());
  if (opts_.parallel) {
    kernel::similarities_parallel(matrix_.data.data(), matrix_.count(), matrix_.dim, q.data(),
                                  sims.data());
  } else {
    kernel::similarities_serial(matrix_.data.data(), matrix_.count(), matrix_.dim, q.data(),
                                sims.data());
  }
  RetrievedContext ctx = select_top(sims, n);
  ctx.fusion_mode = FusionMode::single;
  return ctx;
}

FusedScores DenseRetriever::fused_scores(const QuerySet& queries) const {
  return retrieve_fused_scores_impl(queries, false);
}

FusedScores DenseRetriever::retrieve_fused_scores_impl(const QuerySet& queries,
                                                       bool prepend_basic) const {
  if (corpus_.empty()) throw std::runtime_error("fused_scores: corpus is empty");

  struct Named {
    const char* label;
    const std::string* text;
  };
  const Named expanded[3] = {{"answers", &queries.answers},
                             {"titles", &queries.titles},
                             {"contexts", &queries.contexts}};

  std::vector<std::string> texts;
  for (const Named& e : expanded) {
    if (trim(*e.text).empty()) {
      log_warn(std::string("fused_scores: expanded query '") + e.label +
               "' is empty and was dropped");
      continue;
    }
    texts.push_back(prepend_basic ? queries.basic + "\n" + *e.text : *e.text);
  }

  FusedScores result;
  result.queries_used = texts.size();
  if (texts.empty()) {
    if (trim(queries.basic).empty()) {
      throw std::invalid_argument("fused_scores: all queries empty, including the basic query");
    }
    log_warn("fused_scores: all expanded queries empty, falling back to the basic query");
    result.fell_back_to_basic = true;
    texts.push_back(queries.basic);
  }

  const std::size_t count = matrix_.count();
  const std::size_t dim = matrix_.dim;
  std::vector<float> qmat(texts.size() * dim);
  for (std::size_t q = 0; q < texts.size(); ++q) {
    std::vector<float> v = encode_query(texts[q]);
    std::copy(v.begin(), v.end(), qmat.begin() + q * dim);
  }

  result.table.assign(count, 0.0);
  if (opts_.domain.kind == NormDomainKind::full_corpus) {
    if (opts_.parallel) {
      kernel::fused_scores_parallel(matrix_.data.data(), count, dim, qmat.data(), texts.size(),
                                    result.table.data());
    } else {
      kernel::fused_scores_serial(matrix_.data.data(), count, dim, qmat.data(), texts.size(),
                                  result.table.data());
    }
    return result;
  }

  // Pooled approximation: softmax over the union of per-query top-K_pool
  // candidates; chunks outside the pool keep score 0.
  std::vector<double> sims(count);
  std::vector<std::vector<double>> all_sims(texts.size());
  std::vector<std::uint32_t> pool;
  for (std::size_t q = 0; q < texts.size(); ++q) {
    if (opts_.parallel) {
      kernel::similarities_parallel(matrix_.data.data(), count, dim, qmat.data() + q * dim,
                                    sims.data());
    } else {
      kernel::similarities_serial(matrix_.data.data(), count, dim, qmat.data() + q * dim,
                                  sims.data());
    }
    all_sims[q] = sims;
    auto top = kernel::top_k_desc(sims.data(), count, opts_.domain.k_pool);
    pool.insert(pool.end(), top.begin(), top.end());
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::vector<double> pooled(pool.size());
  for (std::size_t q = 0; q < texts.size(); ++q) {
    for (std::size_t i = 0; i < pool.size(); ++i) pooled[i] = all_sims[q][pool[i]];
    kernel::softmax_serial(pooled.data(), pooled.size());
    for (std::size_t i = 0; i < pool.size(); ++i) result.table[pool[i]] += pooled[i];
  }
  return result;
}

RetrievedContext DenseRetriever::retrieve_fused(const QuerySet& queries, std::size_t n,
                                                bool prepend_basic) const {
  if (n < 1) throw std::invalid_argument("retrieve_fused: n must be >= 1");
  FusedScores fused = retrieve_fused_scores_impl(queries, prepend_basic);
  RetrievedContext ctx = select_top(fused.table, n);
  ctx.fusion_mode = fused.fell_back_to_basic ? FusionMode::single : FusionMode::fused;
  return ctx;
}

std::string DenseRetriever::render_context(const RetrievedContext& ctx) const {
  std::string out;
  for (std::size_t i = 0; i < ctx.entries.size(); ++i) {
    const Chunk& c = corpus_.get_chunk(ctx.entries[i].chunk_id);
    if (i) out += "\n\n";
    if (!c.title.empty()) {
      out += c.title;
      out += "\n";
    }
    out += c.content;
  }
  return out;
}

}  // namespace rgar
