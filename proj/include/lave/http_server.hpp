#pragma once

// JSON-over-HTTP front of the session service, plus a server-sent-event
// stream per session.
//
//   POST   /api/sessions                      {"project": path}
//   DELETE /api/sessions/:id
//   POST   /api/sessions/:id/chat             {"text": ...}   (empty text approves)
//   POST   /api/sessions/:id/approve
//   GET    /api/sessions/:id/gallery
//   GET    /api/sessions/:id/timeline
//   POST   /api/sessions/:id/timeline/:op     add | reorder | trim | remove | undo | render
//   POST   /api/sessions/:id/gallery/:op      select | deselect | select_all | deselect_all
//   POST   /api/sessions/:id/trim-dialog      {"asset_id": n, "command": ...}
//   GET    /api/sessions/:id/events?since=N
//   GET    /api/sessions/:id/stream?since=N   (text/event-stream)
//   GET    /api/sessions/:id/state
//   GET    /api/config                        (credentials redacted)
//
// Errors are {"error": {"code": "<snake_case>", "message": ...}}.

#include <httplib.h>

#include "lave/config.hpp"
#include "lave/service.hpp"

namespace lave {

inline int http_status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SessionNotFound:
        case ErrorCode::ProjectNotFound:
        case ErrorCode::UnknownAsset:
        case ErrorCode::ClipNotOnTimeline:
            return 404;
        case ErrorCode::DuplicateOnTimeline:
        case ErrorCode::NothingToUndo:
        case ErrorCode::EmptyTimeline:
        case ErrorCode::EmptyGallery:
        case ErrorCode::EmptyIndex:
            return 409;
        case ErrorCode::ProviderUnavailable:
        case ErrorCode::ResponseEmpty:
            return 502;
        case ErrorCode::MediaEngineFailure:
        case ErrorCode::IoError:
            return 500;
        case ErrorCode::MalformedStructuredOutput:
        case ErrorCode::SchemaVersionUnsupported:
            return 422;
        default:
            return 400;
    }
}

inline json error_body(std::string_view code, std::string_view message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

inline json events_to_json(const std::vector<UiEvent>& events) {
    json arr = json::array();
    for (const auto& e : events) arr.push_back(e.to_json());
    return arr;
}

class HttpServer {
public:
    HttpServer(SessionManager& sessions, json redacted_config)
        : sessions_(sessions), config_(std::move(redacted_config)) {
        server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
        routes();
    }

    ~HttpServer() { stop(); }

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port) {
        int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) fail(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
        port_ = bound;
        return bound;
    }

    /// Blocks until stop().
    void listen() { server_.listen_after_bind(); }

    void stop() {
        stopping_ = true;
        if (server_.is_running()) server_.stop();
    }

    bool running() const { return server_.is_running(); }
    int port() const noexcept { return port_; }

private:
    using Handler = std::function<json(const httplib::Request&, httplib::Response&)>;

    static json body(const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        auto j = json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail(ErrorCode::InvalidRequest, "request body must be a JSON object");
        return j;
    }

    static std::uint64_t since(const httplib::Request& req) {
        std::string s = req.has_param("since") ? req.get_param_value("since") : req.get_header_value("Last-Event-ID");
        if (s.empty()) return 0;
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidRequest, "since must be a non-negative integer");
        }
    }

    std::shared_ptr<Session> session(const httplib::Request& req) const {
        return sessions_.get(req.path_params.at("id"));
    }

    /// Wraps a handler with JSON encoding and error mapping.
    static httplib::Server::Handler wrap(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            json out;
            try {
                out = h(req, res);
                if (res.status == -1) res.status = 200;
            } catch (const Error& e) {
                res.status = http_status_for(e.code());
                out = error_body(e.code_name(), e.what());
            } catch (const json::exception& e) {
                res.status = 400;
                out = error_body(code_name(ErrorCode::InvalidRequest), e.what());
            } catch (const std::exception& e) {
                res.status = 500;
                out = error_body("internal", e.what());
            }
            res.set_content(out.dump(), "application/json");
        };
    }

    void routes() {
        server_.Post("/api/sessions", wrap([this](const auto& req, auto& res) {
                         auto b = body(req);
                         if (!b.contains("project") || !b["project"].is_string())
                             fail(ErrorCode::InvalidRequest, "\"project\" path is required");
                         auto s = sessions_.open_session(b["project"].template get<std::string>());
                         res.status = 201;
                         return json{{"session_id", s->id()}, {"events", events_to_json(s->events_since(0))}};
                     }));
        server_.Delete("/api/sessions/:id", wrap([this](const auto& req, auto&) {
                           sessions_.close_session(req.path_params.at("id"));
                           return json{{"closed", req.path_params.at("id")}};
                       }));
        server_.Post("/api/sessions/:id/chat", wrap([this](const auto& req, auto&) {
                         auto b = body(req);
                         auto text = b.value("text", std::string{});
                         return json{{"events", events_to_json(session(req)->post_chat(text))}};
                     }));
        server_.Post("/api/sessions/:id/approve", wrap([this](const auto& req, auto&) {
                         return json{{"events", events_to_json(session(req)->approve())}};
                     }));
        server_.Get("/api/sessions/:id/gallery",
                    wrap([this](const auto& req, auto&) { return session(req)->gallery_view(); }));
        server_.Get("/api/sessions/:id/timeline",
                    wrap([this](const auto& req, auto&) { return session(req)->timeline_view(); }));
        server_.Get("/api/sessions/:id/state",
                    wrap([this](const auto& req, auto&) { return session(req)->view_state(); }));
        auto edit = [this](const auto& req, auto&) {
            auto cmd = body(req);
            cmd["op"] = req.path_params.at("op");
            json result;
            auto events = session(req)->direct_edit(cmd, &result);
            json out = {{"events", events_to_json(events)}};
            if (!result.is_null()) out["artifact"] = result;
            return out;
        };
        server_.Post("/api/sessions/:id/timeline/:op", wrap(edit));
        server_.Post("/api/sessions/:id/gallery/:op", wrap([edit](const auto& req, auto& res) {
                         const auto& op = req.path_params.at("op");
                         if (op != "select" && op != "deselect" && op != "select_all" && op != "deselect_all")
                             fail(ErrorCode::InvalidRequest, "unknown gallery operation \"" + op + "\"");
                         return edit(req, res);
                     }));
        server_.Post("/api/sessions/:id/trim-dialog", wrap([this](const auto& req, auto&) {
                         auto b = body(req);
                         if (!b.contains("asset_id") || !b.contains("command"))
                             fail(ErrorCode::InvalidRequest, "\"asset_id\" and \"command\" are required");
                         auto events = session(req)->trim_dialog(b["asset_id"].template get<AssetId>(),
                                                                 b["command"].template get<std::string>());
                         return json{{"events", events_to_json(events)}};
                     }));
        server_.Get("/api/sessions/:id/events", wrap([this](const auto& req, auto&) {
                        return json{{"events", events_to_json(session(req)->events_since(since(req)))}};
                    }));
        server_.Get("/api/config", wrap([this](const auto&, auto&) { return config_; }));
        server_.Get("/api/health", wrap([](const auto&, auto&) { return json{{"status", "ok"}}; }));

        server_.Get("/api/sessions/:id/stream", [this](const httplib::Request& req, httplib::Response& res) {
            std::shared_ptr<Session> s;
            std::uint64_t from = 0;
            try {
                s = session(req);
                from = since(req);
            } catch (const Error& e) {
                res.status = http_status_for(e.code());
                res.set_content(error_body(e.code_name(), e.what()).dump(), "application/json");
                return;
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [this, s, cursor = from](std::size_t, httplib::DataSink& sink) mutable {
                    auto events = s->wait_events(cursor, std::chrono::milliseconds(500));
                    for (const auto& e : events) {
                        std::string frame = "id: " + std::to_string(e.seq) + "\nevent: " +
                                            std::string(event_kind_name(e.kind)) + "\ndata: " + e.to_json().dump() +
                                            "\n\n";
                        if (!sink.write(frame.data(), frame.size())) return false;
                        cursor = e.seq;
                    }
                    if (events.empty()) {
                        static constexpr std::string_view kKeepAlive = ": keep-alive\n\n";
                        if (!sink.write(kKeepAlive.data(), kKeepAlive.size())) return false;
                    }
                    if (s->closed() || stopping_) {
                        sink.done();
                        return false;
                    }
                    return true;
                });
        });
    }

    SessionManager& sessions_;
    json config_;
    httplib::Server server_;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
};

}  // namespace lave
