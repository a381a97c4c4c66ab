// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "common/jsonl.hpp"

namespace ivr {

enum class OpKind { kAnswer, kJudge, kGenerate, kSynthesize };
enum class ResponseStatus { kOk, kRefused, kTransportError };
enum class GatewayMode { kLive, kRecord, kReplay };

std::string_view to_string(OpKind k);
std::string_view to_string(ResponseStatus s);
OpKind parse_op_kind(std::string_view s);
ResponseStatus parse_response_status(std::string_view s);
GatewayMode parse_gateway_mode(std::string_view s);

struct BackendRequest {
  std::string backend_id;
  OpKind op_kind = OpKind::kAnswer;
  json payload = json::object();
  std::int64_t seed = 0;
};

struct BackendResponse {
  ResponseStatus status = ResponseStatus::kTransportError;
  std::string body;     // text, or raw bytes when `binary`
  bool binary = false;  // base64 on the wire and in cassettes
  std::int64_t latency_ms = 0;

  bool ok() const { return status == ResponseStatus::kOk; }
  friend bool operator==(const BackendResponse&, const BackendResponse&) = default;
};

json to_json(const BackendResponse& r);
BackendResponse response_from_json(const json& j);

/// The bytes that identify a request: backend, op, payload and seed as one
/// key-sorted, whitespace-free JSON document.
std::string canonical_request(const BackendRequest& req);

/// 16 hex digits (64 bits of SHA-256) over canonical_request.
std::string canonical_hash(const BackendRequest& req);

struct CassetteEntry {
  std::string request_hash;
  std::string backend_id;
  json request_echo;
  BackendResponse response;
};

json to_json(const CassetteEntry& e);
CassetteEntry cassette_entry_from_json(const json& j);

/// Hash-indexed store of recorded exchanges. Appends are serialized and, when a
/// file is attached, written through as JSON-Lines.
class Cassette {
 public:
  Cassette() = default;
  static std::shared_ptr<Cassette> load(const std::filesystem::path& path);
  /// Loads existing entries (if the file exists) and appends new ones to it.
  static std::shared_ptr<Cassette> open_for_record(const std::filesystem::path& path);

  std::optional<BackendResponse> lookup(const std::string& hash) const;
  /// Returns false when an entry with the same hash already exists.
  bool append(CassetteEntry entry);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, CassetteEntry> entries_;
  std::unique_ptr<std::ofstream> sink_;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// May throw; any exception is treated as a transport error.
  virtual BackendResponse send(const BackendRequest& req) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  double multiplier = 2.0;
  int max_in_flight = 4;

  void validate() const;
};

/// Shared, thread-safe access point to all model backends.
class Gateway {
 public:
  Gateway(GatewayMode mode, RetryPolicy policy, std::shared_ptr<Transport> transport,
          std::shared_ptr<Cassette> cassette = nullptr);

  /// Live: call with retry on transport errors. Record: live call, then append
  /// to the cassette. Replay: cassette lookup only; never touches the transport.
  /// Refusals are returned, never retried.
  /// Throws kReplayMiss or kExhaustedRetries.
  BackendResponse invoke(const BackendRequest& req);

  GatewayMode mode() const { return mode_; }
  const RetryPolicy& policy() const { return policy_; }
  std::size_t transport_calls() const { return transport_calls_.load(); }

 private:
  class Limiter {
   public:
    explicit Limiter(int capacity) : free_(capacity) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
  };

  Limiter& limiter_for(const std::string& backend_id);
  BackendResponse call_live(const BackendRequest& req);

  GatewayMode mode_;
  RetryPolicy policy_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Cassette> cassette_;
  std::mutex limiters_mu_;
  std::map<std::string, std::unique_ptr<Limiter>> limiters_;
  std::atomic<std::size_t> transport_calls_{0};
};

/// Configuration of one backend endpoint.
struct BackendEndpoint {
  std::string id;
  std::string base_url;  // http(s)://host[:port]/path, or sim://
  std::map<std::string, std::string> headers;
  int timeout_ms = 60000;
  json sim = json::object();  // parameters of the built-in simulated backend
};

/// Posts {backend_id, op_kind, payload, seed} as JSON to the endpoint URL. The
/// header value "${API_KEY}" is replaced by env IVR_API_KEY_<ID> (uppercased,
/// non-alphanumerics as '_'); without configured headers a present key is sent
/// as a bearer token.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::map<std::string, BackendEndpoint> endpoints);
  BackendResponse send(const BackendRequest& req) override;

 private:
  std::map<std::string, BackendEndpoint> endpoints_;
};

std::string api_key_env_var(std::string_view backend_id);

/// Dispatches each request to the transport registered for its backend_id.
class RoutingTransport : public Transport {
 public:
  void add(const std::string& backend_id, std::shared_ptr<Transport> t) { routes_[backend_id] = std::move(t); }
  BackendResponse send(const BackendRequest& req) override;

 private:
  std::map<std::string, std::shared_ptr<Transport>> routes_;
};

}  // namespace ivr
