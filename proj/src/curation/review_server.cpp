// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <thread>

#include "common/error.hpp"
#include "curation/review.hpp"

namespace ivr {
namespace {

void reply(httplib::Response& res, int code, const json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int code, std::string_view kind, const std::string& msg) {
  reply(res, code, {{"error", kind}, {"message", msg}});
}

std::size_t param_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto v = req.get_param_value(key);
  std::size_t pos = 0;
  const auto n = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(key);
  return static_cast<std::size_t>(n);
}

}  // namespace

struct ReviewServer::Impl {
  httplib::Server server;
  std::thread thread;
};

ReviewServer::ReviewServer(ReviewLog& log, Options opts) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  const std::string token = opts.bearer_token;
  if (!opts.static_dir.empty()) srv.set_mount_point("/", opts.static_dir.string());

  srv.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.path.rfind("/api/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") != "Bearer " + token) {
      reply_error(res, 401, "Unauthorized", "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  srv.Get("/api/queue", [&log](const httplib::Request& req, httplib::Response& res) {
    QueueQuery q;
    try {
      if (req.has_param("status")) q.status = parse_review_status(req.get_param_value("status"));
      if (req.has_param("corpus")) q.corpus = req.get_param_value("corpus");
      if (req.has_param("category")) q.task_category = req.get_param_value("category");
      q.limit = param_size(req, "limit", q.limit);
      q.offset = param_size(req, "offset", q.offset);
    } catch (const std::exception& e) {
      reply_error(res, 400, "InvalidArgument", std::string("bad query parameter: ") + e.what());
      return;
    }
    reply(res, 200, log.queue(q));
  });

  srv.Get(R"(/api/samples/([^/]+))", [&log](const httplib::Request& req, httplib::Response& res) {
    auto it = log.item(req.matches[1]);
    if (!it) return reply_error(res, 404, "NotFound", "no review item '" + std::string(req.matches[1]) + "'");
    reply(res, 200, to_json(*it));
  });

  srv.Post(R"(/api/samples/([^/]+)/decision)", [&log](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    try {
      if (body.is_discarded()) fail(ErrorCode::kInvalidArgument, "body is not JSON");
      if (body.is_object()) body["sample_id"] = std::string(req.matches[1]);
      const auto d = review_decision_from_json(body);
      const auto r = log.apply_decision(d);
      reply(res, 200, {{"sample_id", d.sample_id},
                       {"status", to_string(r.status)},
                       {"revision", r.revision},
                       {"applied", r.applied}});
    } catch (const Error& e) {
      const int code = e.code() == ErrorCode::kNotFound   ? 404
                       : e.code() == ErrorCode::kConflict ? 409
                       : e.code() == ErrorCode::kIo       ? 500
                                                          : 400;
      reply_error(res, code, error_code_name(e.code()), e.what());
    }
  });

  srv.Get("/api/stats", [&log](const httplib::Request&, httplib::Response& res) { reply(res, 200, log.stats()); });

  port_ = opts.port;
  if (opts.port == 0) {
    port_ = srv.bind_to_any_port(opts.host);
  } else if (!srv.bind_to_port(opts.host, opts.port)) {
    port_ = -1;
  }
  if (port_ <= 0) fail(ErrorCode::kIo, "cannot bind review server on " + opts.host + ":" + std::to_string(opts.port));
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void ReviewServer::run() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ivr
