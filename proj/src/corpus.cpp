#include "rgar/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rgar/text.hpp"

namespace rgar {

using nlohmann::json;

CorpusStats compute_stats(const std::vector<Chunk>& chunks) {
  CorpusStats s;
  s.chunk_count = chunks.size();
  if (chunks.empty()) return s;
  s.min_tokens = chunks.front().token_estimate;
  s.max_tokens = chunks.front().token_estimate;
  std::size_t total = 0;
  for (const Chunk& c : chunks) {
    total += c.token_estimate;
    s.min_tokens = std::min(s.min_tokens, c.token_estimate);
    s.max_tokens = std::max(s.max_tokens, c.token_estimate);
  }
  s.avg_tokens = static_cast<double>(total) / static_cast<double>(chunks.size());
  return s;
}

CorpusStore::CorpusStore(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
  for (Chunk& c : chunks_) {
    if (c.id.empty()) throw std::invalid_argument("chunk with empty id");
    if (c.content.empty()) throw std::invalid_argument("chunk '" + c.id + "' has empty content");
    c.token_estimate = count_ws_tokens(c.content);
  }
  std::sort(chunks_.begin(), chunks_.end(),
            [](const Chunk& a, const Chunk& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < chunks_.size(); ++i) {
    if (chunks_[i].id == chunks_[i - 1].id) {
      throw std::invalid_argument("duplicate chunk id '" + chunks_[i].id + "'");
    }
  }
  stats_ = compute_stats(chunks_);
}

CorpusStore CorpusStore::ingest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("corpus file not found: " + path);
  std::vector<Chunk> chunks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed record");
    }
    Chunk c;
    if (!rec.contains("id") || !rec["id"].is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing string field 'id'");
    }
    if (!rec.contains("content") || !rec["content"].is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": missing string field 'content'");
    }
    c.id = rec["id"].get<std::string>();
    c.content = rec["content"].get<std::string>();
    if (c.content.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty content");
    }
    if (rec.contains("title") && rec["title"].is_string()) {
      c.title = rec["title"].get<std::string>();
    }
    chunks.push_back(std::move(c));
  }
  try {
    return CorpusStore(std::move(chunks));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

CorpusStore CorpusStore::load_dir(const std::string& index_dir) {
  return ingest_file((std::filesystem::path(index_dir) / "chunks.jsonl").string());
}

void CorpusStore::save_dir(const std::string& index_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(index_dir);
  std::ofstream out(fs::path(index_dir) / "chunks.jsonl", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write index dir: " + index_dir);
  for (const Chunk& c : chunks_) {
    nlohmann::ordered_json rec;
    rec["id"] = c.id;
    if (!c.title.empty()) rec["title"] = c.title;
    rec["content"] = c.content;
    rec["token_estimate"] = c.token_estimate;
    out << rec.dump() << "\n";
  }
  nlohmann::ordered_json st;
  st["chunk_count"] = stats_.chunk_count;
  st["avg_tokens"] = stats_.avg_tokens;
  st["max_tokens"] = stats_.max_tokens;
  st["min_tokens"] = stats_.min_tokens;
  std::ofstream sout(fs::path(index_dir) / "stats.json", std::ios::binary);
  sout << st.dump(2) << "\n";
}

const Chunk& CorpusStore::get_chunk(std::string_view id) const {
  auto it = std::lower_bound(chunks_.begin(), chunks_.end(), id,
                             [](const Chunk& c, std::string_view v) { return c.id < v; });
  if (it == chunks_.end() || it->id != id) {
    throw std::out_of_range("unknown chunk id '" + std::string(id) + "'");
  }
  return *it;
}

bool CorpusStore::contains(std::string_view id) const {
  auto it = std::lower_bound(chunks_.begin(), chunks_.end(), id,
                             [](const Chunk& c, std::string_view v) { return c.id < v; });
  return it != chunks_.end() && it->id == id;
}

}  // namespace rgar
