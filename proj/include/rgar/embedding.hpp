#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgar/corpus.hpp"

namespace rgar {

/// Encoder abstraction behind the similarity scoring. Implementations must
/// return finite vectors of exactly dim() entries.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  /// Identifies backend and model; stored in caches and checked on load.
  virtual std::string tag() const = 0;
  /// Throws on empty text (after trimming), transport failure, or a vector
  /// that does not match the declared dimension.
  virtual std::vector<float> embed_text(const std::string& text) = 0;
  virtual std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts);
};

/// Deterministic test embedder: hashes each whitespace token into a bucket,
/// accumulates counts, then L2-normalizes. Pure function of (text, dim, seed).
class MockEmbedder final : public EmbeddingProvider {
 public:
  explicit MockEmbedder(std::size_t dim, std::uint64_t seed = 0, bool l2_normalize = true);
  std::size_t dim() const override { return dim_; }
  std::string tag() const override;
  std::vector<float> embed_text(const std::string& text) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  bool l2_normalize_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;  // full URL, e.g. http://host:port/v1/embeddings
  std::string api_key;
  std::string model;
  std::size_t dim = 0;
  bool l2_normalize = false;
  int batch_size = 16;
  int max_in_flight = 4;
  int max_attempts = 3;
  int backoff_ms = 100;
};

/// OpenAI-compatible embeddings endpoint:
/// POST {"model": str, "input": [str]} -> {"data": [{"embedding": [float]}]}.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig cfg);
  std::size_t dim() const override { return cfg_.dim; }
  std::string tag() const override { return "remote:" + cfg_.model + "-" + std::to_string(cfg_.dim); }
  std::vector<float> embed_text(const std::string& text) override;
  std::vector<std::vector<float>> embed_batch(const std::vector<std::string>& texts) override;
  const RemoteEmbedderConfig& config() const { return cfg_; }

 private:
  RemoteEmbedderConfig cfg_;
};

/// One vector per chunk, rows in ascending chunk-id order. Immutable once
/// built; shared freely across threads.
struct EmbeddingMatrix {
  std::vector<std::string> chunk_ids;
  std::size_t dim = 0;
  std::string provider_tag;
  std::vector<float> data;  // row-major count() x dim

  std::size_t count() const { return chunk_ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::optional<std::size_t> row_of(std::string_view id) const;
};

/// Binary cache: magic, version, dim, count, provider_tag, ids, then packed
/// little-endian float32 rows. Roundtrip is bitwise-exact.
void save_matrix(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix load_matrix(const std::string& path);

/// load_matrix plus a provider_tag/dim guard; throws on mismatch.
EmbeddingMatrix load_matrix_checked(const std::string& path, const std::string& expected_tag,
                                    std::size_t expected_dim);

/// Embeds every chunk (content text, ascending id order). When cache_path
/// exists and matches (tag, dim, ids), it is loaded without touching the
/// provider. On mid-run failure the partial work is discarded unless
/// resume is set, in which case completed rows are kept in a sidecar file
/// and only missing ids are re-embedded on the next call.
EmbeddingMatrix embed_corpus(const CorpusStore& corpus, EmbeddingProvider& provider,
                             const std::string& cache_path, bool resume = false);

}  // namespace rgar
