#pragma once

#include <memory>
#include <string>

#include "rgar/pipeline.hpp"

namespace rgar {

/// Minimal single-route test server: POST /answer takes a QASample record
/// and returns the AnswerRecord the `answer` verb would produce for the same
/// configuration. No auth, not meant for deployment.
class AnswerServer {
 public:
  AnswerServer(const DenseRetriever& retriever, LlmGateway& gateway, RunConfig config);
  ~AnswerServer();

  /// Binds and serves on a background thread. port == 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rgar
