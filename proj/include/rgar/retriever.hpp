#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rgar/corpus.hpp"
#include "rgar/embedding.hpp"
#include "rgar/query_gen.hpp"

namespace rgar {

struct ScoredChunk {
  std::string chunk_id;
  double score = 0.0;
};

enum class FusionMode { single, fused };
const char* to_string(FusionMode m);

enum class NormDomainKind { full_corpus, pooled };

struct NormDomain {
  NormDomainKind kind = NormDomainKind::full_corpus;
  std::size_t k_pool = 1000;  // per-query pool size in pooled mode
  std::string to_string() const;
};

struct RetrievedContext {
  std::vector<ScoredChunk> entries;  // descending score, ties by ascending id
  std::size_t n_requested = 0;
  FusionMode fusion_mode = FusionMode::single;
  NormDomain normalization_domain;
};

struct FusedScores {
  std::vector<double> table;       // aligned with matrix row order
  std::size_t queries_used = 0;    // expanded queries that were non-empty
  bool fell_back_to_basic = false; // all three empty -> scored basic alone
};

struct RetrieverOptions {
  bool parallel = true;  // OpenMP kernels; the serial path is the reference
  NormDomain domain;
};

/// Exact scan over the immutable embedding matrix. Scoring is Eq.-style
/// inner product; fusion normalizes each expanded query's similarities by
/// softmax over the normalization domain and sums the three distributions.
class DenseRetriever {
 public:
  DenseRetriever(const CorpusStore& corpus, const EmbeddingMatrix& matrix,
                 EmbeddingProvider& query_encoder, RetrieverOptions opts = {});

  /// Plain inner product; throws on dimension mismatch. Symmetric.
  static double similarity(std::span<const float> a, std::span<const float> b);

  RetrievedContext top_n(const std::string& query_text, std::size_t n) const;

  FusedScores fused_scores(const QuerySet& queries) const;

  /// Top-n by fused score. Empty expanded queries are dropped (warned); if
  /// all three are empty the basic query is scored alone and the result is
  /// tagged fusion_mode == single.
  RetrievedContext retrieve_fused(const QuerySet& queries, std::size_t n,
                                  bool prepend_basic = false) const;

  /// Chunk texts joined by blank lines, each prefixed with its title when
  /// present; the prompt-side rendering of a retrieval result.
  std::string render_context(const RetrievedContext& ctx) const;

  const CorpusStore& corpus() const { return corpus_; }
  const EmbeddingMatrix& matrix() const { return matrix_; }
  const RetrieverOptions& options() const { return opts_; }

 private:
  std::vector<float> encode_query(const std::string& text) const;
  RetrievedContext select_top(const std::vector<double>& scores, std::size_t n) const;
  FusedScores retrieve_fused_scores_impl(const QuerySet& queries, bool prepend_basic) const;

  const CorpusStore& corpus_;
  const EmbeddingMatrix& matrix_;
  EmbeddingProvider& encoder_;
  RetrieverOptions opts_;
};

}  // namespace rgar
