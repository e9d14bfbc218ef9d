#pragma once
// HTTP front end of the agent service.

#include <string>

#include "ttbys/agent_service.hpp"

namespace httplib {
class Server;
}

namespace ttbys {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Value for Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin;
};

/// Routes:
///   POST /sessions                      {task, background}
///   POST /sessions/{id}/utterances      {text}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/export?traces=1
///   POST /sessions/{id}/ratings         {dimension, verdict, comparison_target?, turn_index?, note?}
///   GET  /healthz
/// Errors are {"error": <code>, "message": ...} with a matching status.
void register_routes(httplib::Server& server, AgentService& service, const HttpOptions& options);

/// HTTP status for an error code.
int http_status(ErrorCode code);

/// Blocks until the server stops.
void serve(AgentService& service, const HttpOptions& options);

}  // namespace ttbys
