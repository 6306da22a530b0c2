#include "qguard/gateway.hpp"

#include <httplib.h>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, nlohmann::json{{"error", {{"code", code}, {"message", message}}}});
}

int status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::Validation:
      return 400;
    case ErrorCode::BackendTransport:
    case ErrorCode::BackendTimeout:
      return 502;
    case ErrorCode::Indeterminate:
      // A fully unreachable backend surfaces here via the probe fan-out.
      return e.what() && std::string(e.what()).find("unreachable") != std::string::npos ? 502 : 503;
    default:
      return 500;
  }
}

}  // namespace

GatewayServer::GatewayServer(Engine& engine)
    : engine_(engine), server_(std::make_unique<httplib::Server>()) {
  setup_routes();
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::setup_routes() {
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, "INTERNAL", e.what());
    } catch (...) {
      send_error(res, 500, "INTERNAL", "unknown error");
    }
  });

  auto authorized = [this](const httplib::Request& req, httplib::Response& res) {
    const std::string& token = engine_.config().auth_token;
    if (token.empty()) return true;
    if (req.get_header_value("Authorization") == "Bearer " + token) return true;
    send_error(res, 401, "UNAUTHORIZED", "missing or invalid bearer token");
    return false;
  };

  server_->Post("/v1/guard", [this, authorized](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "PARSE_ERROR", std::string("request body is not valid JSON: ") + e.what());
      return;
    }
    if (!body.is_object()) {
      send_error(res, 400, "PARSE_ERROR", "request body must be a JSON object");
      return;
    }

    UserInput input;
    input.text = body.value("text", "");
    if (body.contains("image_b64")) {
      ImageAttachment img;
      try {
        img.bytes = base64_decode(body.at("image_b64").get<std::string>());
      } catch (const Error& e) {
        send_error(res, 400, "PARSE_ERROR", e.what());
        return;
      }
      img.media_type = body.value("media_type", "application/octet-stream");
      input.image = std::move(img);
    }
    if (input.text.empty() && !input.image) {
      send_error(res, 400, "INVALID_ARGUMENT", "request needs text or image_b64");
      return;
    }

    Engine::ClassifyOptions options;
    options.include_report = body.value("include_report", false);
    try {
      if (body.contains("threshold")) options.threshold = body.at("threshold").get<double>();
      if (body.contains("method"))
        options.method = method_from_name(body.at("method").get<std::string>());
      auto result = engine_.classify(input, options);
      nlohmann::json out = decision_to_json(result.decision);
      if (result.report)
        out["report"] = report_to_json(*result.report, engine_.config().report_include_texts);
      send_json(res, 200, out);
    } catch (const Error& e) {
      send_error(res, status_for(e), error_code_name(e.code()), e.what());
    }
  });

  server_->Post("/v1/reload", [this, authorized](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    try {
      std::string version = engine_.reload_questions();
      send_json(res, 200, nlohmann::json{{"question_set_version", version}});
    } catch (const Error& e) {
      send_error(res, status_for(e), error_code_name(e.code()), e.what());
    }
  });

  server_->Get("/v1/health", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json out{{"status", "ok"},
                       {"question_set_version", engine_.question_set()->version},
                       {"uptime_seconds",
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count()}};
    if (req.get_param_value("deep") == "true") out["backend_reachable"] = engine_.backend().healthy();
    send_json(res, 200, out);
  });
}

bool GatewayServer::bind() {
  const std::string& listen = engine_.config().listen;
  auto colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::Validation, "listen address must be host:port, got '" + listen + "'");
  host_ = listen.substr(0, colon);
  int port = std::stoi(listen.substr(colon + 1));
  started_ = std::chrono::steady_clock::now();
  if (port == 0) {
    port_ = server_->bind_to_any_port(host_);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host_, port)) return false;
  port_ = port;
  return true;
}

bool GatewayServer::start() {
  if (!bind()) return false;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return true;
}

void GatewayServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

bool GatewayServer::run() {
  if (!bind()) return false;
  return server_->listen_after_bind();
}

}  // namespace qguard
