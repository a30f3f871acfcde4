#include "rgar/llm.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "rgar/http.hpp"
#include "rgar/text.hpp"

namespace rgar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_max_tokens(TemplateRole role) {
  switch (role) {
    case TemplateRole::reader_plain:
    case TemplateRole::reader_cot:
      return 1024;
    default:
      return 512;
  }
}

// The shipped prompt texts. The same texts live under prompts/ as data
// files; a unit test keeps the two in sync.
std::vector<PromptTemplate> builtin_templates() {
  std::vector<PromptTemplate> out;

  out.push_back({"generator_answer", "",
                 R"__({{question}}
Please give 4 options for the question. Each option should be a concise description of a key detail, formatted as: A. "key detail 1" B. "key detail 2" C. "key detail 3" D. "key detail 4)__",
                 TemplateRole::generator_answer});

  out.push_back({"generator_title", "",
                 R"__({{question}}
Please generate some titles of references that might address the above question. Please give me only the titles, formatted as: ["title 1", "title 2", ..., "title N"]. Please be careful not to give specific content and analysis, just the title.)__",
                 TemplateRole::generator_title});

  out.push_back({"generator_context", "",
                 R"__({{question}}
Please generate some knowledge that might address the above question. please give me only the knowledge.)__",
                 TemplateRole::generator_context});

  out.push_back({"extractor", "",
                 R"__(Here are the relevant knowledge sources:
{{context}}
Here are the electronic health records:
{{ehr}}
Here is the question:
{{question}}
Please analyze and extract the key factual information in the electronic health records relevant to solving this question and present it as a Python list.
Use concise descriptions for each item, formatted as ["key detail 1", ..., "key detail N"]. Please only give me the list. Here is the list:)__",
                 TemplateRole::extractor});

  // Enrichment wording for the two-stage ablation; not taken from any
  // published template.
  out.push_back({"extractor_enrich", "",
                 R"__(Here are the relevant knowledge sources:
{{context}}
Here are the filtered patient facts:
{{ehr}}
Here is the question:
{{question}}
Please analyze the filtered facts using the knowledge sources, explain the significance of any numerical findings, and summarize the evidence needed to answer the question as a short paragraph. Please only give me the summary.)__",
                 TemplateRole::extractor});

  out.push_back({"reader_plain",
                 R"__(You are a helpful medical expert, and your task is to answer a multi-choice medical question using the relevant documents. Organize your output in a json formatted as Dict {"answer_choice": Str{A/B/C/...}}. Your responses will be used for research purposes only, so please have a definite answer. Please just give me the json of the answer.)__",
                 R"__(Here are the relevant documents:
{{context}}
Here is the question:
{{question}}
Here are the potential choices:
{{options}}
Please just give me the json of the answer. Generate your output in json:)__",
                 TemplateRole::reader_plain});

  out.push_back({"reader_cot",
                 R"__(You are a helpful medical expert, and your task is to answer a multi-choice medical question. Please first think step-by-step and then choose the answer from the provided options. Organize your output in a json formatted as Dict{"step_by_step_thinking": Str(explanation), "answer_choice": Str{A/B/C/...}}. Your responses will be used for research purposes only, so please have a definite answer. Please just give me the json of the answer.)__",
                 R"__(Here are the relevant documents:
{{context}}
Here is the question:
{{question}}
Here are the potential choices:
{{options}}
Please think step-by-step and generate your output in one json:)__",
                 TemplateRole::reader_cot});

  return out;
}

// Substitutes {{key}} occurrences; records which keys were used.
std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& bindings,
                       const std::string& template_name, std::set<std::string>& used) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto open = text.find("{{", i);
    if (open == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    auto close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    const std::string key = text.substr(open + 2, close - open - 2);
    auto it = bindings.find(key);
    if (it == bindings.end()) {
      throw std::invalid_argument("template '" + template_name + "': missing binding for {{" +
                                  key + "}}");
    }
    out.append(text, i, open - i);
    out.append(it->second);
    used.insert(key);
    i = close + 2;
  }
  return out;
}

}  // namespace

PromptRegistry PromptRegistry::builtin() {
  PromptRegistry r;
  for (auto& t : builtin_templates()) r.add(std::move(t));
  return r;
}

void PromptRegistry::add(PromptTemplate t) {
  templates_[t.name] = std::move(t);
}

void PromptRegistry::load_dir(const std::string& dir) {
  auto read_file = [](const fs::path& p) -> std::string {
    std::ifstream in(p, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // Data files end with a newline that is not part of the prompt.
    if (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  };
  for (auto& [name, t] : templates_) {
    const fs::path sys = fs::path(dir) / (name + ".system.txt");
    const fs::path usr = fs::path(dir) / (name + ".user.txt");
    if (fs::exists(sys)) t.system_text = read_file(sys);
    if (fs::exists(usr)) t.user_text = read_file(usr);
  }
}

const PromptTemplate& PromptRegistry::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw std::invalid_argument("unknown template '" + name + "'");
  return it->second;
}

bool PromptRegistry::has(const std::string& name) const { return templates_.count(name) > 0; }

std::vector<std::string> PromptRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : templates_) out.push_back(name);
  return out;
}

ChatRequest PromptRegistry::render(const std::string& name,
                                   const std::map<std::string, std::string>& bindings) const {
  const PromptTemplate& t = get(name);
  std::set<std::string> used;
  ChatRequest req;
  req.system = substitute(t.system_text, bindings, name, used);
  req.user = substitute(t.user_text, bindings, name, used);
  req.temperature = 0.0;
  req.max_tokens = default_max_tokens(t.role);
  req.template_name = name;
  for (const auto& [key, value] : bindings) {
    if (!used.count(key)) {
      log_warn("template '" + name + "': unused binding '" + key + "'");
    }
  }
  return req;
}

// --- scripted backend ---------------------------------------------------

namespace {
std::uint64_t request_fingerprint(const ChatRequest& r) {
  return fnv1a64(r.system + '\x1F' + r.user);
}
}  // namespace

void ScriptedChatBackend::add_exact(const ChatRequest& request, std::string response) {
  exact_[request_fingerprint(request)] = std::move(response);
}

void ScriptedChatBackend::add_rule(std::string user_contains, std::string response) {
  rules_.emplace_back(std::vector<std::string>{std::move(user_contains)}, std::move(response));
}

void ScriptedChatBackend::add_rule(std::vector<std::string> user_contains_all,
                                   std::string response) {
  rules_.emplace_back(std::move(user_contains_all), std::move(response));
}

ChatResponse ScriptedChatBackend::chat(const ChatRequest& request) {
  calls_.fetch_add(1);
  if (record_) {
    std::lock_guard<std::mutex> lk(mutex_);
    log_.push_back(request);
  }
  ChatResponse resp;
  resp.backend_tag = tag();
  auto it = exact_.find(request_fingerprint(request));
  if (it != exact_.end()) {
    resp.text = it->second;
    return resp;
  }
  for (const auto& [needles, response] : rules_) {
    bool all = true;
    for (const std::string& needle : needles) {
      if (request.user.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) {
      resp.text = response;
      return resp;
    }
  }
  if (echo_fallback_) {
    const std::uint64_t h = request_fingerprint(request);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "echo %08x %08x", static_cast<unsigned>(h >> 32),
                  static_cast<unsigned>(h & 0xFFFFFFFFu));
    resp.text = buf;
    return resp;
  }
  throw std::runtime_error("scripted backend: no response registered for request (template '" +
                           request.template_name + "')");
}

std::vector<ChatRequest> ScriptedChatBackend::recorded_requests() const {
  std::lock_guard<std::mutex> lk(mutex_);
  return log_;
}

void ScriptedChatBackend::reset_counters() {
  calls_.store(0);
  std::lock_guard<std::mutex> lk(mutex_);
  log_.clear();
}

// --- remote backend -------------------------------------------------------

RemoteChatBackend::RemoteChatBackend(RemoteChatConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) throw std::invalid_argument("remote chat backend needs an endpoint URL");
}

ChatResponse RemoteChatBackend::chat(const ChatRequest& request) {
  json body;
  body["model"] = cfg_.model;
  json messages = json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  body["messages"] = messages;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;

  const auto t0 = std::chrono::steady_clock::now();
  HttpRetryPolicy policy{cfg_.max_attempts, cfg_.backoff_ms};
  const std::string raw = http_post_json(cfg_.endpoint, cfg_.api_key, body.dump(), policy);
  const auto t1 = std::chrono::steady_clock::now();

  json parsed = json::parse(raw, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
      parsed["choices"].empty()) {
    throw std::runtime_error("chat endpoint returned malformed body");
  }
  const auto& choice = parsed["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content")) {
    throw std::runtime_error("chat endpoint choice missing message content");
  }
  ChatResponse resp;
  resp.text = choice["message"]["content"].get<std::string>();
  resp.backend_tag = tag();
  resp.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return resp;
}

std::shared_ptr<ScriptedChatBackend> scripted_backend_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("script file not found: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw std::runtime_error("script file is not a JSON object: " + path);
  }
  auto backend = std::make_shared<ScriptedChatBackend>();
  if (doc.value("echo_fallback", false)) backend->set_echo_fallback(true);
  for (const auto& rule : doc.value("rules", json::array())) {
    const auto& contains = rule.at("contains");
    if (contains.is_array()) {
      backend->add_rule(contains.get<std::vector<std::string>>(),
                        rule.at("response").get<std::string>());
    } else {
      backend->add_rule(contains.get<std::string>(), rule.at("response").get<std::string>());
    }
  }
  for (const auto& item : doc.value("exact", json::array())) {
    ChatRequest req;
    req.system = item.value("system", "");
    req.user = item.at("user").get<std::string>();
    backend->add_exact(req, item.at("response").get<std::string>());
  }
  return backend;
}

RemoteChatConfig remote_chat_config_from_env() {
  RemoteChatConfig cfg;
  if (const char* e = std::getenv("RGAR_CHAT_ENDPOINT")) cfg.endpoint = e;
  if (const char* k = std::getenv("RGAR_API_KEY")) cfg.api_key = k;
  if (const char* m = std::getenv("RGAR_CHAT_MODEL")) cfg.model = m;
  return cfg;
}

// --- gateway ---------------------------------------------------------------

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> shared, PromptRegistry registry)
    : generator_(shared), extractor_(shared), reader_(std::move(shared)),
      registry_(std::move(registry)) {}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> generator,
                       std::shared_ptr<ChatBackend> extractor, std::shared_ptr<ChatBackend> reader,
                       PromptRegistry registry)
    : generator_(std::move(generator)), extractor_(std::move(extractor)),
      reader_(std::move(reader)), registry_(std::move(registry)) {}

ChatRequest LlmGateway::render(const std::string& template_name,
                               const std::map<std::string, std::string>& bindings) const {
  return registry_.render(template_name, bindings);
}

ChatResponse LlmGateway::chat(LlmRole role, const ChatRequest& request) {
  calls_.fetch_add(1);
  switch (role) {
    case LlmRole::generator:
      return generator_->chat(request);
    case LlmRole::extractor:
      return extractor_->chat(request);
    case LlmRole::reader:
      return reader_->chat(request);
  }
  throw std::logic_error("unreachable");
}

}  // namespace rgar
