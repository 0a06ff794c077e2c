#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

#include "d4gr/session.hpp"

namespace {

using d4gr::Json;

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, {{"v", d4gr::kProtocolVersion}, {"error", msg}}, status);
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json j;
  try {
    j = Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw d4gr::ParseError(std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw d4gr::ParseError("request body must be a JSON object");
  if (j.contains("v") && j["v"] != d4gr::kProtocolVersion)
    throw d4gr::ValidationError("unsupported protocol version " + j["v"].dump());
  return j;
}

std::string string_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw d4gr::ValidationError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

/// Maps engine errors onto HTTP status codes.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const d4gr::UnknownIdError& e) {
      send_error(res, 404, e.what());
    } catch (const d4gr::ProtocolError& e) {
      send_error(res, 409, e.what());
    } catch (const d4gr::ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const d4gr::ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session service: a live human plays the acting user"};
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--host", host, "bind address")->capture_default_str();
  app.add_option("--port", port, "port")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  d4gr::SessionManager sessions;
  httplib::Server server;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  server.Get("/domains", guarded([&](const httplib::Request&, httplib::Response& res) { send_json(res, sessions.domains()); }));

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto id = sessions.create(string_field(body, "domain"), body.value("cfg", Json(nullptr)));
                send_json(res, {{"v", d4gr::kProtocolVersion}, {"id", id}}, 201);
              }));

  server.Get(R"(/sessions/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const bool truth = req.get_param_value("truth") != "0";
               send_json(res, sessions.get(req.matches[1])->snapshot(truth));
             }));

  server.Post(R"(/sessions/([^/]+)/step)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                send_json(res, sessions.get(req.matches[1])->submit_step(string_field(body, "action")));
              }));

  server.Post(R"(/sessions/([^/]+)/utterance)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                send_json(res, sessions.get(req.matches[1])->submit_utterance(string_field(body, "text")));
              }));

  server.Post(R"(/sessions/([^/]+)/close)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                sessions.get(req.matches[1])->close();
                send_json(res, {{"v", d4gr::kProtocolVersion}, {"closed", true}});
              }));

  // Server-sent events mirroring every agent turn. Last-Event-ID resumes.
  server.Get(R"(/sessions/([^/]+)/events)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               auto session = sessions.get(req.matches[1]);
               std::size_t start = 0;
               if (req.has_header("Last-Event-ID")) start = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
               auto sent = std::make_shared<std::size_t>(start);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider("text/event-stream", [session, sent](std::size_t, httplib::DataSink& sink) {
                 auto events = session->events_after(*sent, std::chrono::seconds(15));
                 if (events.empty()) {
                   if (session->closed()) {
                     sink.done();
                     return true;
                   }
                   const std::string ping = ": keepalive\n\n";
                   return sink.write(ping.data(), ping.size());
                 }
                 for (const auto& e : events) {
                   const std::string msg = "id: " + std::to_string(*sent) + "\nevent: agent_turn\ndata: " + e.dump() + "\n\n";
                   if (!sink.write(msg.data(), msg.size())) return false;
                   ++*sent;
                 }
                 return true;
               });
             }));

  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
