#include "rgar/serve.hpp"

#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rgar/eval.hpp"

namespace rgar {

using nlohmann::json;

struct AnswerServer::Impl {
  const DenseRetriever& retriever;
  LlmGateway& gateway;
  RunConfig config;
  httplib::Server server;
  std::thread thread;

  Impl(const DenseRetriever& r, LlmGateway& g, RunConfig c)
      : retriever(r), gateway(g), config(std::move(c)) {
    server.Post("/answer", [this](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        res.status = 400;
        res.set_content(R"({"error":"body is not valid JSON"})", "application/json");
        return;
      }
      QASample sample;
      try {
        sample = sample_from_json(body);
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        return;
      }
      Pipeline pipeline(retriever, gateway);
      PipelineTrace trace = pipeline.run_rgar(sample, config);
      if (!trace.error.empty()) {
        res.status = 500;
        res.set_content(json{{"error", trace.error}}.dump(), "application/json");
        return;
      }
      res.set_content(answer_to_json(trace.answer).dump(), "application/json");
    });
  }
};

AnswerServer::AnswerServer(const DenseRetriever& retriever, LlmGateway& gateway, RunConfig config)
    : impl_(std::make_unique<Impl>(retriever, gateway, std::move(config))) {}

AnswerServer::~AnswerServer() { stop(); }

int AnswerServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw std::runtime_error("failed to bind server port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("failed to bind port " + std::to_string(port));
  }
  impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnswerServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rgar
