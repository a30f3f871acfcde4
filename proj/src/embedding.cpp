#include "rgar/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rgar/http.hpp"
#include "rgar/text.hpp"

namespace rgar {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::vector<float>> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

// --- mock -------------------------------------------------------------

MockEmbedder::MockEmbedder(std::size_t dim, std::uint64_t seed, bool l2_normalize)
    : dim_(dim), seed_(seed), l2_normalize_(l2_normalize) {
  if (dim_ == 0) throw std::invalid_argument("mock embedder dim must be positive");
}

std::string MockEmbedder::tag() const {
  std::string t = "mock-" + std::to_string(dim_);
  if (seed_ != 0) t += "-s" + std::to_string(seed_);
  if (!l2_normalize_) t += "-raw";
  return t;
}

std::vector<float> MockEmbedder::embed_text(const std::string& text) {
  if (trim(text).empty()) throw std::invalid_argument("cannot embed empty text");
  std::vector<float> v(dim_, 0.0f);
  for (std::string_view tok : split_ws(text)) {
    v[fnv1a64(tok, seed_) % dim_] += 1.0f;
  }
  if (l2_normalize_) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (float& x : v) x = static_cast<float>(x / norm);
    }
  }
  return v;
}

// --- remote -----------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) throw std::invalid_argument("remote embedder needs an endpoint URL");
  if (cfg_.dim == 0) throw std::invalid_argument("remote embedder needs a declared dim");
}

std::vector<float> RemoteEmbedder::embed_text(const std::string& text) {
  return embed_batch({text}).front();
}

std::vector<std::vector<float>> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
  for (const auto& t : texts) {
    if (trim(t).empty()) throw std::invalid_argument("cannot embed empty text");
  }
  json body;
  body["model"] = cfg_.model;
  body["input"] = texts;
  HttpRetryPolicy policy{cfg_.max_attempts, cfg_.backoff_ms};
  const std::string resp =
      http_post_json(cfg_.endpoint, cfg_.api_key, body.dump(), policy);
  json parsed = json::parse(resp, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array()) {
    throw std::runtime_error("embedding endpoint returned malformed body");
  }
  const auto& data = parsed["data"];
  if (data.size() != texts.size()) {
    throw std::runtime_error("embedding endpoint returned " + std::to_string(data.size()) +
                             " vectors for " + std::to_string(texts.size()) + " inputs");
  }
  std::vector<std::vector<float>> out(texts.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& item = data[i];
    std::size_t pos = i;
    if (item.contains("index") && item["index"].is_number_unsigned()) {
      pos = item["index"].get<std::size_t>();
      if (pos >= out.size()) throw std::runtime_error("embedding endpoint returned bad index");
    }
    if (!item.contains("embedding") || !item["embedding"].is_array()) {
      throw std::runtime_error("embedding endpoint item missing 'embedding'");
    }
    std::vector<float> v = item["embedding"].get<std::vector<float>>();
    if (v.size() != cfg_.dim) {
      throw std::runtime_error("embedding dimension mismatch: declared " +
                               std::to_string(cfg_.dim) + ", got " + std::to_string(v.size()));
    }
    for (float x : v) {
      if (!std::isfinite(x)) throw std::runtime_error("embedding contains non-finite entry");
    }
    if (cfg_.l2_normalize) {
      double norm = 0.0;
      for (float x : v) norm += static_cast<double>(x) * x;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (float& x : v) x = static_cast<float>(x / norm);
      }
    }
    out[pos] = std::move(v);
  }
  return out;
}

// --- matrix + cache ----------------------------------------------------

std::optional<std::size_t> EmbeddingMatrix::row_of(std::string_view id) const {
  auto it = std::lower_bound(chunk_ids.begin(), chunk_ids.end(), id);
  if (it == chunk_ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - chunk_ids.begin());
}

namespace {

constexpr char kMagic[8] = {'R', 'G', 'A', 'R', 'V', 'E', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_str(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
  std::uint32_t len = 0;
  read_pod(in, len);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

}  // namespace

void save_matrix(const EmbeddingMatrix& m, const std::string& path) {
  if (m.data.size() != m.count() * m.dim) {
    throw std::invalid_argument("matrix data size does not match count*dim");
  }
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  // Write to a temp file then rename so a crash never leaves a torn cache.
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open cache for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(m.dim));
    write_pod(out, static_cast<std::uint64_t>(m.count()));
    write_str(out, m.provider_tag);
    for (const auto& id : m.chunk_ids) write_str(out, id);
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short write to cache: " + path);
  }
  fs::rename(tmp, p);
}

EmbeddingMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("embedding cache not found: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("bad embedding cache magic: " + path);
  }
  std::uint32_t version = 0, dim = 0;
  std::uint64_t count = 0;
  read_pod(in, version);
  if (version != kVersion) throw std::runtime_error("unsupported embedding cache version");
  read_pod(in, dim);
  read_pod(in, count);
  EmbeddingMatrix m;
  m.dim = dim;
  m.provider_tag = read_str(in);
  m.chunk_ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) m.chunk_ids.push_back(read_str(in));
  m.data.resize(static_cast<std::size_t>(count) * dim);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated embedding cache: " + path);
  if (!std::is_sorted(m.chunk_ids.begin(), m.chunk_ids.end())) {
    throw std::runtime_error("embedding cache ids not sorted: " + path);
  }
  return m;
}

EmbeddingMatrix load_matrix_checked(const std::string& path, const std::string& expected_tag,
                                    std::size_t expected_dim) {
  EmbeddingMatrix m = load_matrix(path);
  if (m.provider_tag != expected_tag) {
    throw std::runtime_error("embedding cache provider_tag mismatch: cache has '" +
                             m.provider_tag + "', provider is '" + expected_tag + "'");
  }
  if (m.dim != expected_dim) {
    throw std::runtime_error("embedding cache dim mismatch: cache has " + std::to_string(m.dim) +
                             ", provider declares " + std::to_string(expected_dim));
  }
  return m;
}

namespace {

// Sidecar record stream for resumable corpus embedding: (id, vector) pairs.
void append_partial(const std::string& path, const std::string& id,
                    const std::vector<float>& v) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  write_str(out, id);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<std::pair<std::string, std::vector<float>>> read_partial(const std::string& path,
                                                                     std::size_t dim) {
  std::vector<std::pair<std::string, std::vector<float>>> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  while (true) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) break;
    std::string id(len, '\0');
    in.read(id.data(), len);
    std::vector<float> v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) break;  // trailing torn record is ignored
    out.emplace_back(std::move(id), std::move(v));
  }
  return out;
}

}  // namespace

EmbeddingMatrix embed_corpus(const CorpusStore& corpus, EmbeddingProvider& provider,
                             const std::string& cache_path, bool resume) {
  const std::string tag = provider.tag();
  const std::size_t dim = provider.dim();

  if (fs::exists(cache_path)) {
    EmbeddingMatrix cached = load_matrix_checked(cache_path, tag, dim);
    std::vector<std::string> want;
    want.reserve(corpus.size());
    for (const Chunk& c : corpus.chunks()) want.push_back(c.id);
    if (cached.chunk_ids != want) {
      throw std::runtime_error("embedding cache id set does not match corpus: " + cache_path);
    }
    return cached;
  }

  EmbeddingMatrix m;
  m.dim = dim;
  m.provider_tag = tag;
  m.chunk_ids.reserve(corpus.size());
  for (const Chunk& c : corpus.chunks()) m.chunk_ids.push_back(c.id);
  m.data.assign(m.count() * dim, 0.0f);

  const std::string partial_path = cache_path + ".partial";
  std::vector<bool> done(corpus.size(), false);
  if (resume) {
    for (auto& [id, vec] : read_partial(partial_path, dim)) {
      if (auto r = m.row_of(id)) {
        std::copy(vec.begin(), vec.end(), m.data.begin() + *r * dim);
        done[*r] = true;
      }
    }
  } else {
    fs::remove(partial_path);
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!done[i]) todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= todo.size()) return;
      const std::size_t row = todo[t];
      try {
        std::vector<float> v = provider.embed_text(corpus.chunks()[row].content);
        if (v.size() != dim) throw std::runtime_error("provider returned wrong dimension");
        std::lock_guard<std::mutex> lk(io_mutex);
        std::copy(v.begin(), v.end(), m.data.begin() + row * dim);
        if (resume) append_partial(partial_path, m.chunk_ids[row], v);
      } catch (...) {
        std::lock_guard<std::mutex> lk(io_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(todo.size());  // stop remaining work
        return;
      }
    }
  };

  int n_workers = 1;
  if (auto* remote = dynamic_cast<RemoteEmbedder*>(&provider)) {
    n_workers = std::max(1, remote->config().max_in_flight);
  }
  n_workers = static_cast<int>(std::min<std::size_t>(n_workers, std::max<std::size_t>(todo.size(), 1)));

  std::vector<std::thread> threads;
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& th : threads) th.join();

  if (first_error) {
    if (!resume) fs::remove(partial_path);
    std::rethrow_exception(first_error);
  }

  save_matrix(m, cache_path);
  fs::remove(partial_path);
  return m;
}

}  // namespace rgar
