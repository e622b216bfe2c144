// JSON HTTP API over an Engine.
//
//   POST /api/sessions                          snapshot -> {session_id}
//   GET  /api/sessions                          -> {sessions: [...]}
//   GET  /api/sessions/{id}                     -> summary
//   GET  /api/sessions/{id}/trace?from=&count=  -> trace page
//   PUT  /api/sessions/{id}/problem             ProblemSpec -> 204
//   POST /api/sessions/{id}/repair              -> 202, poll the summary
//   GET  /api/sessions/{id}/patches             -> ranked entries
//   GET  /api/sessions/{id}/patches/{pid}/preview  -> text/x-diff
//   POST /api/sessions/{id}/patches/{pid}/accept   -> patched source
//
// Errors are JSON objects {error, message}.
#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "tracefix/service/engine.hpp"

namespace tracefix::service {

inline constexpr int kDefaultTracePage = 100;
inline constexpr int kMaxTracePage = 1000;

nlohmann::json session_summary(const RepairSession& session);

class HttpServer {
 public:
  explicit HttpServer(Engine& engine);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop(). False when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  // Serves on the port taken by bind_any_port; blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tracefix::service
