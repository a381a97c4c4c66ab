// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <regex>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "gateway/gateway.hpp"

namespace ivr {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) fail(ErrorCode::kConfig, "unsupported backend URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

std::string api_key_env_var(std::string_view backend_id) {
  std::string name = "IVR_API_KEY_";
  for (char c : backend_id) {
    name += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                                         : '_';
  }
  return name;
}

HttpTransport::HttpTransport(std::map<std::string, BackendEndpoint> endpoints) : endpoints_(std::move(endpoints)) {
  for (const auto& [id, ep] : endpoints_) split_url(ep.base_url);
}

BackendResponse HttpTransport::send(const BackendRequest& req) {
  auto it = endpoints_.find(req.backend_id);
  if (it == endpoints_.end()) fail(ErrorCode::kConfig, "unknown backend '" + req.backend_id + "'");
  const BackendEndpoint& ep = it->second;
  const auto url = split_url(ep.base_url);

  const char* key = std::getenv(api_key_env_var(ep.id).c_str());
  httplib::Headers headers;
  for (const auto& [name, value] : ep.headers) {
    std::string v = value;
    if (auto pos = v.find("${API_KEY}"); pos != std::string::npos) v.replace(pos, 10, key ? key : "");
    headers.emplace(name, v);
  }
  if (ep.headers.empty() && key) headers.emplace("Authorization", std::string("Bearer ") + key);

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(ep.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  json body = {{"backend_id", req.backend_id},
               {"op_kind", to_string(req.op_kind)},
               {"payload", req.payload},
               {"seed", req.seed}};
  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, headers, canonical_dump(body), "application/json");
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (!res) return {ResponseStatus::kTransportError, httplib::to_string(res.error()), false, latency};
  if (res->status < 200 || res->status >= 300) {
    return {ResponseStatus::kTransportError, "HTTP " + std::to_string(res->status), false, latency};
  }
  try {
    auto resp = response_from_json(json::parse(res->body));
    resp.latency_ms = latency;
    return resp;
  } catch (const std::exception& e) {
    return {ResponseStatus::kTransportError, std::string("malformed response: ") + e.what(), false, latency};
  }
}

}  // namespace ivr
