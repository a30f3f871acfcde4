#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace rgar {

enum class TemplateRole {
  generator_answer,
  generator_title,
  generator_context,
  extractor,
  reader_plain,
  reader_cot,
};

struct PromptTemplate {
  std::string name;
  std::string system_text;
  std::string user_text;  // placeholders: {{context}} {{question}} {{options}} {{ehr}}
  TemplateRole role;
};

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 512;
  std::string template_name;  // provenance for tests/traces, not sent on the wire
};

struct ChatResponse {
  std::string text;
  std::string backend_tag;
  std::int64_t latency_ms = 0;
};

/// Holds the shipped prompt texts. builtin() returns the compiled-in set;
/// load_dir overrides from <name>.system.txt / <name>.user.txt files so
/// prompts stay editable without rebuilding.
class PromptRegistry {
 public:
  static PromptRegistry builtin();

  void add(PromptTemplate t);
  void load_dir(const std::string& dir);
  const PromptTemplate& get(const std::string& name) const;  // throws on unknown name
  bool has(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Substitutes placeholders; throws on unknown template or missing binding,
  /// warns on unused bindings. The rendered request carries the role's
  /// max_tokens default and temperature 0.
  ChatRequest render(const std::string& name,
                     const std::map<std::string, std::string>& bindings) const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual std::string tag() const = 0;
};

/// Deterministic test backend. Lookup order: exact request fingerprint
/// (hash over the raw rendered system+user text), then substring rules in
/// registration order, then the echo fallback when enabled. Performs no
/// network activity; missing responses are a test error.
class ScriptedChatBackend final : public ChatBackend {
 public:
  void add_exact(const ChatRequest& request, std::string response);
  void add_rule(std::string user_contains, std::string response);
  /// All needles must appear in the user text.
  void add_rule(std::vector<std::string> user_contains_all, std::string response);
  void set_echo_fallback(bool on) { echo_fallback_ = on; }
  void set_record_requests(bool on) { record_ = on; }

  ChatResponse chat(const ChatRequest& request) override;
  std::string tag() const override { return "scripted"; }

  std::size_t call_count() const { return calls_.load(); }
  std::vector<ChatRequest> recorded_requests() const;
  void reset_counters();

 private:
  std::map<std::uint64_t, std::string> exact_;
  std::vector<std::pair<std::vector<std::string>, std::string>> rules_;
  bool echo_fallback_ = false;
  bool record_ = false;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::vector<ChatRequest> log_;
};

struct RemoteChatConfig {
  std::string endpoint;  // full URL, e.g. http://host:port/v1/chat/completions
  std::string api_key;
  std::string model;
  int max_attempts = 3;
  int backoff_ms = 100;
};

/// OpenAI-compatible chat completions wire shape.
class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(RemoteChatConfig cfg);
  ChatResponse chat(const ChatRequest& request) override;
  std::string tag() const override { return "remote:" + cfg_.model; }

 private:
  RemoteChatConfig cfg_;
};

/// Reads RGAR_CHAT_ENDPOINT, RGAR_API_KEY, RGAR_CHAT_MODEL.
RemoteChatConfig remote_chat_config_from_env();

/// Loads a scripted backend from a JSON script file:
/// {"echo_fallback": bool?, "rules": [{"contains", "response"}],
///  "exact": [{"system"?, "user", "response"}]}.
std::shared_ptr<ScriptedChatBackend> scripted_backend_from_file(const std::string& path);

enum class LlmRole { generator, extractor, reader };

/// Single access point for all LLM calls: rendering plus role-routed chat.
/// The three roles may point at distinct backends; by default they share one.
class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<ChatBackend> shared, PromptRegistry registry);
  LlmGateway(std::shared_ptr<ChatBackend> generator, std::shared_ptr<ChatBackend> extractor,
             std::shared_ptr<ChatBackend> reader, PromptRegistry registry);

  ChatRequest render(const std::string& template_name,
                     const std::map<std::string, std::string>& bindings) const;
  ChatResponse chat(LlmRole role, const ChatRequest& request);

  const PromptRegistry& registry() const { return registry_; }
  std::size_t total_calls() const { return calls_.load(); }
  void reset_counters() { calls_.store(0); }

 private:
  std::shared_ptr<ChatBackend> generator_, extractor_, reader_;
  PromptRegistry registry_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace rgar
