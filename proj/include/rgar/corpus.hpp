#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rgar {

/// One corpus passage, the unit of retrieval.
struct Chunk {
  std::string id;
  std::string title;
  std::string content;
  std::size_t token_estimate = 0;  // whitespace-token count of content
};

struct CorpusStats {
  std::size_t chunk_count = 0;
  double avg_tokens = 0.0;
  std::size_t max_tokens = 0;
  std::size_t min_tokens = 0;
};

CorpusStats compute_stats(const std::vector<Chunk>& chunks);

/// Immutable after construction: chunks are validated, token-counted and
/// kept sorted by id, so concurrent readers need no coordination.
class CorpusStore {
 public:
  CorpusStore() = default;
  explicit CorpusStore(std::vector<Chunk> chunks);

  /// Line-delimited records {"id": str, "title": str?, "content": str}.
  /// Throws on missing file, malformed record (with line number), duplicate
  /// id, or empty content.
  static CorpusStore ingest_file(const std::string& path);

  /// Reads <dir>/chunks.jsonl written by save_dir.
  static CorpusStore load_dir(const std::string& index_dir);
  void save_dir(const std::string& index_dir) const;

  const Chunk& get_chunk(std::string_view id) const;  // throws std::out_of_range
  bool contains(std::string_view id) const;

  /// Sorted ascending by id.
  const std::vector<Chunk>& chunks() const { return chunks_; }
  std::size_t size() const { return chunks_.size(); }
  bool empty() const { return chunks_.empty(); }
  const CorpusStats& stats() const { return stats_; }

 private:
  std::vector<Chunk> chunks_;
  CorpusStats stats_;
};

}  // namespace rgar
