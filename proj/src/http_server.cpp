#include "ttbys/http_server.hpp"

#include <httplib.h>

namespace ttbys {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::SessionNotFound: return 404;
    case ErrorCode::SessionBusy: return 409;
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownDimension:
    case ErrorCode::UnknownLabel:
    case ErrorCode::Parse:
    case ErrorCode::EmptyUtterance:
    case ErrorCode::EmptyHistory:
    case ErrorCode::NonAlternatingRoles: return 400;
    case ErrorCode::BackendFailure:
    case ErrorCode::RemoteUnavailable: return 502;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", to_string(code)}, {"message", message}}, http_status(code));
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("request body is not JSON: ") + e.what());
  }
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::Parse, e.what());
    } catch (const std::exception& e) {
      send_json(res, {{"error", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, AgentService& service, const HttpOptions& options) {
  if (!options.cors_origin.empty()) {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}});
  });

  server.Post("/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const Session s = service.create_session(require(body, "task").get<std::string>(),
                                             body.value("background", std::string()));
    send_json(res, export_session(s, true), 201);
  }));

  server.Post(R"(/sessions/([^/]+)/utterances)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const auto result = service.post_utterance(req.matches[1], require(body, "text").get<std::string>());
                send_json(res, {{"agent_reply", result.agent_reply}, {"inference", encode(result.inference)}});
              }));

  server.Get(R"(/sessions/([^/]+)/export)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const bool traces = req.has_param("traces") && req.get_param_value("traces") != "0";
    send_json(res, service.export_transcript(req.matches[1], traces));
  }));

  server.Post(R"(/sessions/([^/]+)/ratings)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const RatingRecord r = decode_rating(body);
    service.record_rating(req.matches[1], r);
    const Session s = service.get(req.matches[1]);
    json rates = json::object();
    for (const auto& [dim, w] : win_rates(s.ratings)) {
      rates[std::string(to_string(dim))] = {
          {"wins", w.wins}, {"losses", w.losses}, {"ties", w.ties}, {"win_pct", w.win_pct()}, {"lose_pct", w.lose_pct()}};
    }
    send_json(res, {{"rating", encode(r)}, {"win_rates", rates}}, 201);
  }));

  server.Get(R"(/sessions/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    send_json(res, service.export_transcript(req.matches[1], true));
  }));
}

void serve(AgentService& service, const HttpOptions& options) {
  httplib::Server server;
  register_routes(server, service, options);
  if (!server.listen(options.host, options.port)) {
    fail(ErrorCode::Io, "cannot listen on " + options.host + ":" + std::to_string(options.port));
  }
}

}  // namespace ttbys
