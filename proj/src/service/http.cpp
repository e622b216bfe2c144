#include "tracefix/service/http.hpp"

#include "httplib.h"
#include "tracefix/lang/parser.hpp"

namespace tracefix::service {

using nlohmann::json;

json session_summary(const RepairSession& s) {
  json snap = snapshot::snapshot_to_json(s.snapshot);
  json locs = json::array();
  for (const auto& l : s.locations)
    locs.push_back({{"function", l.function}, {"line", l.line}, {"suspiciousness", l.suspiciousness}});
  const auto& out = s.original_trace.outcome;
  json outcome{{"kind", interp::to_string(out.kind)}};
  if (out.kind == interp::OutcomeKind::Raised)
    outcome.update({{"raise_kind", out.raise_kind}, {"message", out.message}, {"function", out.function}, {"line", out.line}});
  if (out.kind == interp::OutcomeKind::Completed) outcome["value"] = snapshot::value_to_json(out.value);
  json j{{"session_id", s.session_id},
         {"status", to_string(s.status)},
         {"program_source", s.snapshot.program_source},
         {"entry", snap["entry"]},
         {"stop_idx", s.snapshot.stop_idx},
         {"stack", snap["stack"]},
         {"problem", s.snapshot.problem ? snapshot::problem_to_json(*s.snapshot.problem) : json(nullptr)},
         {"trace_length", s.original_trace.events.size()},
         {"outcome", outcome},
         {"locations", locs},
         {"patch_count", s.ranked ? json(s.ranked->entries.size()) : json(nullptr)},
         {"accepted", s.accepted ? json(*s.accepted) : json(nullptr)},
         {"history_length", s.history.size()}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

int parse_id(const std::string& text) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UnknownPatch("no patch '" + text + "'");
}

int query_int(const httplib::Request& req, const char* name, int fallback) {
  if (!req.has_param(name)) return fallback;
  try {
    return std::stoi(req.get_param_value(name));
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("query parameter '") + name + "' must be an integer");
  }
}

// Runs a handler and maps engine errors to status codes.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const UnknownSession& e) {
      send_error(res, 404, "UnknownSession", e.what());
    } catch (const UnknownPatch& e) {
      send_error(res, 404, "UnknownPatch", e.what());
    } catch (const SnapshotInconsistent& e) {
      send_error(res, 400, "SnapshotInconsistent", e.what());
    } catch (const AlreadyAccepted& e) {
      send_error(res, 409, "AlreadyAccepted", e.what());
    } catch (const SessionBusy& e) {
      send_error(res, 409, "SessionBusy", e.what());
    } catch (const NoProblem& e) {
      send_error(res, 422, "NoProblem", e.what());
    } catch (const NoLocations& e) {
      send_error(res, 422, "NoLocations", e.what());
    } catch (const snapshot::SchemaError& e) {
      send_error(res, 400, "SchemaError", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "BadJson", e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Engine& e) : engine(e) {}
  Engine& engine;
  httplib::Server server;
};

HttpServer::HttpServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
  auto& srv = impl_->server;
  Engine& eng = engine;

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  srv.Post("/api/sessions", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    auto snap = snapshot::snapshot_from_json(json::parse(req.body));
    send_json(res, 201, {{"session_id", eng.create_session(snap)}});
  }));

  srv.Get("/api/sessions", guarded([&eng](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& id : eng.session_ids()) {
      auto s = eng.session(id);
      list.push_back({{"session_id", id}, {"status", to_string(s.status)}});
    }
    send_json(res, 200, {{"sessions", list}});
  }));

  srv.Get(R"(/api/sessions/([^/]+))", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, session_summary(eng.session(req.matches[1])));
  }));

  srv.Get(R"(/api/sessions/([^/]+)/trace)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    auto s = eng.session(req.matches[1]);
    int from = query_int(req, "from", 0);
    int count = query_int(req, "count", kDefaultTracePage);
    if (from < 0 || count < 0) throw std::invalid_argument("from and count must not be negative");
    count = std::min(count, kMaxTracePage);
    const auto& events = s.original_trace.events;
    json page = json::array();
    for (int i = from; i < from + count && i < static_cast<int>(events.size()); ++i)
      page.push_back(event_to_json(events[static_cast<std::size_t>(i)]));
    send_json(res, 200, {{"total", events.size()}, {"from", from}, {"events", page}});
  }));

  srv.Put(R"(/api/sessions/([^/]+)/problem)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    eng.set_problem(req.matches[1], snapshot::problem_from_json(json::parse(req.body)));
    res.status = 204;
  }));

  srv.Post(R"(/api/sessions/([^/]+)/repair)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    eng.start_repair(id);
    send_json(res, 202, {{"session_id", id}, {"status", to_string(eng.session(id).status)}});
  }));

  srv.Get(R"(/api/sessions/([^/]+)/patches)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
    auto s = eng.session(req.matches[1]);
    json body{{"status", to_string(s.status)}};
    if (s.ranked) {
      body.update(ranked_to_json(lang::parse(s.snapshot.program_source), *s.ranked));
    } else {
      body["entries"] = json::array();
    }
    send_json(res, 200, body);
  }));

  srv.Get(R"(/api/sessions/([^/]+)/patches/([^/]+)/preview)",
          guarded([&eng](const httplib::Request& req, httplib::Response& res) {
            res.set_content(eng.preview(req.matches[1], parse_id(req.matches[2])), "text/x-diff");
          }));

  srv.Post(R"(/api/sessions/([^/]+)/patches/([^/]+)/accept)",
           guarded([&eng](const httplib::Request& req, httplib::Response& res) {
             res.set_content(eng.accept(req.matches[1], parse_id(req.matches[2])), "text/plain");
           }));
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tracefix::service
