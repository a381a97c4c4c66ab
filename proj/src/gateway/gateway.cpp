// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/gateway.hpp"

#include <cmath>
#include <thread>

#include "common/digest.hpp"
#include "common/error.hpp"

namespace ivr {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::kAnswer: return "Answer";
    case OpKind::kJudge: return "Judge";
    case OpKind::kGenerate: return "Generate";
    case OpKind::kSynthesize: return "Synthesize";
  }
  return "Answer";
}

std::string_view to_string(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::kOk: return "Ok";
    case ResponseStatus::kRefused: return "Refused";
    case ResponseStatus::kTransportError: return "TransportError";
  }
  return "TransportError";
}

OpKind parse_op_kind(std::string_view s) {
  if (s == "Answer") return OpKind::kAnswer;
  if (s == "Judge") return OpKind::kJudge;
  if (s == "Generate") return OpKind::kGenerate;
  if (s == "Synthesize") return OpKind::kSynthesize;
  fail(ErrorCode::kParse, "unknown op_kind '" + std::string(s) + "'");
}

ResponseStatus parse_response_status(std::string_view s) {
  if (s == "Ok") return ResponseStatus::kOk;
  if (s == "Refused") return ResponseStatus::kRefused;
  if (s == "TransportError") return ResponseStatus::kTransportError;
  fail(ErrorCode::kParse, "unknown response status '" + std::string(s) + "'");
}

GatewayMode parse_gateway_mode(std::string_view s) {
  if (s == "live") return GatewayMode::kLive;
  if (s == "record") return GatewayMode::kRecord;
  if (s == "replay") return GatewayMode::kReplay;
  fail(ErrorCode::kConfig, "unknown mode '" + std::string(s) + "' (expected live|record|replay)");
}

json to_json(const BackendResponse& r) {
  return {{"status", to_string(r.status)},
          {"body", r.binary ? base64_encode(r.body) : r.body},
          {"body_encoding", r.binary ? "base64" : "text"},
          {"latency_ms", r.latency_ms}};
}

BackendResponse response_from_json(const json& j) {
  BackendResponse r;
  r.status = parse_response_status(j.at("status").get<std::string>());
  r.binary = j.value("body_encoding", std::string("text")) == "base64";
  const auto body = j.value("body", std::string{});
  r.body = r.binary ? base64_decode(body) : body;
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  return r;
}

std::string canonical_request(const BackendRequest& req) {
  json doc = {{"backend_id", req.backend_id},
              {"op_kind", to_string(req.op_kind)},
              {"payload", req.payload},
              {"seed", req.seed}};
  return canonical_dump(doc);
}

std::string canonical_hash(const BackendRequest& req) { return hash64_hex(canonical_request(req)); }

json to_json(const CassetteEntry& e) {
  return {{"request_hash", e.request_hash},
          {"backend_id", e.backend_id},
          {"request_echo", e.request_echo},
          {"response", to_json(e.response)}};
}

CassetteEntry cassette_entry_from_json(const json& j) {
  try {
    return {j.at("request_hash").get<std::string>(), j.at("backend_id").get<std::string>(),
            j.value("request_echo", json::object()), response_from_json(j.at("response"))};
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("cassette entry: ") + e.what());
  }
}

std::shared_ptr<Cassette> Cassette::load(const std::filesystem::path& path) {
  auto c = std::make_shared<Cassette>();
  for (const auto& row : read_jsonl(path)) {
    auto e = cassette_entry_from_json(row);
    c->entries_.emplace(e.request_hash, std::move(e));
  }
  return c;
}

std::shared_ptr<Cassette> Cassette::open_for_record(const std::filesystem::path& path) {
  auto c = std::filesystem::exists(path) ? load(path) : std::make_shared<Cassette>();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  c->sink_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*c->sink_) fail(ErrorCode::kIo, "cannot open cassette " + path.string());
  return c;
}

std::optional<BackendResponse> Cassette::lookup(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

bool Cassette::append(CassetteEntry entry) {
  std::lock_guard lock(mu_);
  if (entries_.count(entry.request_hash)) return false;
  if (sink_) {
    *sink_ << canonical_dump(to_json(entry)) << '\n';
    sink_->flush();
  }
  auto key = entry.request_hash;
  entries_.emplace(std::move(key), std::move(entry));
  return true;
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) fail(ErrorCode::kConfig, "retry.max_attempts must be >= 1");
  if (max_in_flight < 1) fail(ErrorCode::kConfig, "retry.max_in_flight must be >= 1");
  if (base_delay.count() < 0) fail(ErrorCode::kConfig, "retry.base_delay_ms must be >= 0");
  if (!(multiplier >= 1.0)) fail(ErrorCode::kConfig, "retry.multiplier must be >= 1");
}

void Gateway::Limiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void Gateway::Limiter::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

Gateway::Gateway(GatewayMode mode, RetryPolicy policy, std::shared_ptr<Transport> transport,
                 std::shared_ptr<Cassette> cassette)
    : mode_(mode), policy_(policy), transport_(std::move(transport)), cassette_(std::move(cassette)) {
  policy_.validate();
  if (mode_ != GatewayMode::kLive && !cassette_) fail(ErrorCode::kConfig, "record/replay mode requires a cassette");
  if (mode_ != GatewayMode::kReplay && !transport_) fail(ErrorCode::kConfig, "live/record mode requires a transport");
}

Gateway::Limiter& Gateway::limiter_for(const std::string& backend_id) {
  std::lock_guard lock(limiters_mu_);
  auto& slot = limiters_[backend_id];
  if (!slot) slot = std::make_unique<Limiter>(policy_.max_in_flight);
  return *slot;
}

BackendResponse Gateway::call_live(const BackendRequest& req) {
  Limiter& limiter = limiter_for(req.backend_id);
  auto delay = std::chrono::duration<double, std::milli>(policy_.base_delay);
  BackendResponse resp;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    limiter.acquire();
    const auto start = std::chrono::steady_clock::now();
    try {
      ++transport_calls_;
      resp = transport_->send(req);
    } catch (const std::exception& e) {
      resp = {ResponseStatus::kTransportError, e.what(), false, 0};
    }
    limiter.release();
    if (resp.latency_ms == 0) {
      resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                            .count();
    }
    if (resp.status == ResponseStatus::kOk && resp.body.empty()) {
      resp = {ResponseStatus::kTransportError, "empty body", false, resp.latency_ms};
    }
    if (resp.status != ResponseStatus::kTransportError) return resp;
    if (attempt < policy_.max_attempts && delay.count() > 0) {
      std::this_thread::sleep_for(delay);
      delay *= policy_.multiplier;
    }
  }
  return resp;
}

BackendResponse Gateway::invoke(const BackendRequest& req) {
  const std::string hash = canonical_hash(req);
  BackendResponse resp;
  if (mode_ == GatewayMode::kReplay) {
    auto hit = cassette_->lookup(hash);
    if (!hit) fail(ErrorCode::kReplayMiss, "no cassette entry for " + req.backend_id + " request " + hash);
    resp = std::move(*hit);
  } else {
    resp = call_live(req);
    if (mode_ == GatewayMode::kRecord) {
      json echo = {{"op_kind", to_string(req.op_kind)}, {"payload", req.payload}, {"seed", req.seed}};
      cassette_->append({hash, req.backend_id, std::move(echo), resp});
    }
  }
  if (resp.status == ResponseStatus::kTransportError) {
    fail(ErrorCode::kExhaustedRetries,
         req.backend_id + ": transport error after " + std::to_string(policy_.max_attempts) + " attempts: " + resp.body);
  }
  return resp;
}

BackendResponse RoutingTransport::send(const BackendRequest& req) {
  auto it = routes_.find(req.backend_id);
  if (it == routes_.end()) fail(ErrorCode::kConfig, "no transport for backend '" + req.backend_id + "'");
  return it->second->send(req);
}

}  // namespace ivr
