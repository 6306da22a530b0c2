#include "qguard/qguard.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "qguard/engine.hpp"
#include "qguard/error.hpp"
#include "qguard/gateway.hpp"
#include "qguard/util.hpp"

using qguard::Error;
using qguard::ErrorCode;

struct qguard_engine {
  std::unique_ptr<qguard::Engine> engine;
  std::unique_ptr<qguard::GatewayServer> server;
};

namespace {

thread_local std::string t_last_error;

qguard_status status_from(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return QGUARD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return QGUARD_ERR_PARSE;
    case ErrorCode::Validation: return QGUARD_ERR_VALIDATION;
    case ErrorCode::Io: return QGUARD_ERR_IO;
    case ErrorCode::BackendTransport:
    case ErrorCode::BackendTimeout:
    case ErrorCode::TokenNotFound: return QGUARD_ERR_BACKEND;
    case ErrorCode::Indeterminate: return QGUARD_ERR_INDETERMINATE;
    case ErrorCode::Internal: return QGUARD_ERR_INTERNAL;
  }
  return QGUARD_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
qguard_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return QGUARD_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return QGUARD_ERR_INTERNAL;
  }
}

qguard::UserInput input_from_request(const nlohmann::json& req) {
  qguard::UserInput input;
  input.text = req.value("text", "");
  if (req.contains("image_path")) {
    std::string path = req.at("image_path").get<std::string>();
    std::string bytes = qguard::read_file(path);
    qguard::ImageAttachment img;
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : qguard::to_lower(path.substr(dot + 1));
    img.media_type = ext == "jpg" || ext == "jpeg" ? "image/jpeg"
                     : ext == "gif"                ? "image/gif"
                     : ext == "webp"               ? "image/webp"
                                                   : "image/png";
    img.bytes.assign(bytes.begin(), bytes.end());
    input.image = std::move(img);
  } else if (req.contains("image_b64")) {
    qguard::ImageAttachment img;
    img.bytes = qguard::base64_decode(req.at("image_b64").get<std::string>());
    img.media_type = req.value("media_type", "application/octet-stream");
    input.image = std::move(img);
  }
  return input;
}

nlohmann::json parse_request(const char* request_json) {
  if (!request_json) throw Error(ErrorCode::InvalidArgument, "request_json is NULL");
  try {
    auto req = nlohmann::json::parse(request_json);
    if (!req.is_object()) throw Error(ErrorCode::Parse, "request must be a JSON object");
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("request is not valid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* qguard_version(void) { return "0.1.0"; }

const char* qguard_last_error(void) { return t_last_error.c_str(); }

void qguard_string_free(char* s) { std::free(s); }

qguard_status qguard_engine_create(const char* config_json, qguard_engine** out) {
  return guarded([&]() -> qguard_status {
    if (!config_json || !out) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("config is not valid JSON: ") + e.what());
    }
    auto handle = std::make_unique<qguard_engine>();
    handle->engine = std::make_unique<qguard::Engine>(qguard::parse_engine_config(doc));
    *out = handle.release();
    return QGUARD_OK;
  });
}

qguard_status qguard_engine_create_from_file(const char* config_path, qguard_engine** out) {
  return guarded([&]() -> qguard_status {
    if (!config_path || !out) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    auto handle = std::make_unique<qguard_engine>();
    handle->engine = std::make_unique<qguard::Engine>(qguard::load_engine_config_file(config_path));
    *out = handle.release();
    return QGUARD_OK;
  });
}

void qguard_engine_destroy(qguard_engine* engine) {
  if (!engine) return;
  if (engine->server) engine->server->stop();
  delete engine;
}

qguard_status qguard_classify(qguard_engine* engine, const char* request_json,
                              char** response_json_out) {
  return guarded([&]() -> qguard_status {
    if (!engine || !response_json_out) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    auto req = parse_request(request_json);
    qguard::Engine::ClassifyOptions options;
    options.include_report = req.value("include_report", false);
    if (req.contains("threshold")) options.threshold = req.at("threshold").get<double>();
    if (req.contains("method"))
      options.method = qguard::method_from_name(req.at("method").get<std::string>());
    auto result = engine->engine->classify(input_from_request(req), options);
    nlohmann::json out = qguard::decision_to_json(result.decision);
    if (result.report) out["report"] = qguard::report_to_json(*result.report, true);
    *response_json_out = dup_string(out.dump());
    return QGUARD_OK;
  });
}

qguard_status qguard_eval(qguard_engine* engine, const char* dataset_path,
                          char** metrics_json_out) {
  return guarded([&]() -> qguard_status {
    if (!engine || !dataset_path || !metrics_json_out)
      throw Error(ErrorCode::InvalidArgument, "NULL argument");
    auto report = engine->engine->evaluate(dataset_path);
    *metrics_json_out = dup_string(qguard::metrics_to_json(report).dump());
    return QGUARD_OK;
  });
}

qguard_status qguard_export_graph(qguard_engine* engine, const char* request_json,
                                  char** dot_out) {
  return guarded([&]() -> qguard_status {
    if (!engine || !dot_out) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    auto req = parse_request(request_json);
    *dot_out = dup_string(engine->engine->export_graph_dot(input_from_request(req)));
    return QGUARD_OK;
  });
}

qguard_status qguard_reload(qguard_engine* engine, char** version_out) {
  return guarded([&]() -> qguard_status {
    if (!engine || !version_out) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    *version_out = dup_string(engine->engine->reload_questions());
    return QGUARD_OK;
  });
}

qguard_status qguard_serve(qguard_engine* engine) {
  return guarded([&]() -> qguard_status {
    if (!engine) throw Error(ErrorCode::InvalidArgument, "NULL argument");
    engine->server = std::make_unique<qguard::GatewayServer>(*engine->engine);
    if (!engine->server->run()) {
      t_last_error = "failed to bind " + engine->engine->config().listen;
      return QGUARD_ERR_IO;
    }
    return QGUARD_OK;
  });
}

qguard_status qguard_serve_stop(qguard_engine* engine) {
  return guarded([&]() -> qguard_status {
    if (!engine || !engine->server) throw Error(ErrorCode::InvalidArgument, "no running server");
    engine->server->stop();
    return QGUARD_OK;
  });
}

}  // extern "C"
