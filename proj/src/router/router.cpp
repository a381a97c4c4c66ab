// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "router/router.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "model/answer.hpp"

namespace ivr {

void RouterConfig::validate() const {
  if (probers.empty()) fail(ErrorCode::kConfig, "router.probers must not be empty");
  if (runs_per_prober < 1) fail(ErrorCode::kConfig, "router.runs_per_prober must be >= 1");
  if (threshold_den < 1 || threshold_num < 1 || threshold_num > threshold_den) {
    fail(ErrorCode::kConfig, "router.failure_threshold must lie in (0, 1]");
  }
  if (!(numeric_tolerance >= 0.0)) fail(ErrorCode::kConfig, "router.numeric_tolerance must be >= 0");
}

std::string_view to_string(RoutePath p) { return p == RoutePath::kVisualPath ? "VisualPath" : "TextPath"; }

RoutePath parse_route_path(std::string_view s) {
  if (s == "VisualPath") return RoutePath::kVisualPath;
  if (s == "TextPath") return RoutePath::kTextPath;
  fail(ErrorCode::kParse, "unknown routing path '" + std::string(s) + "'");
}

json to_json(const RoutingDecision& d) {
  json verdicts = json::array();
  for (const auto& v : d.verdicts) {
    verdicts.push_back({{"prober_id", v.prober_id}, {"raw_answer", v.raw_answer}, {"correct", v.correct}});
  }
  return {{"status", "ok"}, {"path", to_string(d.path)}, {"verdicts", std::move(verdicts)}};
}

RoutingDecision routing_from_json(const std::string& sample_id, const json& j) {
  RoutingDecision d;
  d.sample_id = sample_id;
  d.path = parse_route_path(j.at("path").get<std::string>());
  for (const auto& v : j.at("verdicts")) {
    d.verdicts.push_back(
        {v.at("prober_id").get<std::string>(), v.at("raw_answer").get<std::string>(), v.at("correct").get<bool>()});
  }
  return d;
}

bool grade_attempt(std::string_view raw, const AnswerSpec& gold, double tol) {
  auto pred = try_canonicalize(raw, gold);
  if (!pred) return false;
  if (gold.kind == AnswerKind::kMultipleChoice) {
    std::string g = gold.label;
    for (auto& c : g) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return pred->label() == g;
  }
  const double rel = std::abs(pred->number() - gold.number) / std::max(std::abs(gold.number), 1e-9);
  return rel <= tol;
}

RoutingDecision decide_route(std::string sample_id, std::vector<ProberVerdict> verdicts, const RouterConfig& cfg) {
  if (verdicts.size() != cfg.attempts()) {
    fail(ErrorCode::kWrongAttemptCount, sample_id + ": expected " + std::to_string(cfg.attempts()) +
                                            " verdicts, got " + std::to_string(verdicts.size()));
  }
  const auto incorrect = static_cast<long long>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const ProberVerdict& v) { return !v.correct; }));
  const auto total = static_cast<long long>(verdicts.size());
  // incorrect / total >= num / den, in integers.
  const bool visual = incorrect * cfg.threshold_den >= static_cast<long long>(cfg.threshold_num) * total;
  return {std::move(sample_id), visual ? RoutePath::kVisualPath : RoutePath::kTextPath, std::move(verdicts)};
}

PathCounts& PathCounts::operator+=(const PathCounts& o) {
  total += o.total;
  visual += o.visual;
  text += o.text;
  failed += o.failed;
  return *this;
}

void RoutingStats::add(Corpus corpus, const std::optional<RoutePath>& path) {
  PathCounts c;
  c.total = 1;
  if (!path) {
    c.failed = 1;
  } else if (*path == RoutePath::kVisualPath) {
    c.visual = 1;
  } else {
    c.text = 1;
  }
  overall += c;
  per_corpus[std::string(to_string(corpus))] += c;
}

void RoutingStats::merge(const RoutingStats& other) {
  overall += other.overall;
  for (const auto& [k, v] : other.per_corpus) per_corpus[k] += v;
}

namespace {

json counts_json(const PathCounts& c) {
  auto frac = [&](std::size_t n) { return c.total ? static_cast<double>(n) / static_cast<double>(c.total) : 0.0; };
  return {{"total", c.total},
          {"visual", c.visual},
          {"text", c.text},
          {"routing_failed", c.failed},
          {"visual_fraction", frac(c.visual)},
          {"text_fraction", frac(c.text)},
          {"failed_fraction", frac(c.failed)}};
}

}  // namespace

json RoutingStats::to_json() const {
  json per = json::object();
  for (const auto& [k, v] : per_corpus) per[k] = counts_json(v);
  json j = counts_json(overall);
  j["per_corpus"] = std::move(per);
  return j;
}

json to_json(const RoutedSample& r) {
  json j = to_json(r.sample);
  if (r.decision) {
    j["routing"] = to_json(*r.decision);
  } else {
    j["routing"] = {{"status", "routing_failed"}, {"error", r.failure}};
  }
  return j;
}

RoutedSample routed_from_json(const json& j) {
  RoutedSample r;
  json sample = j;
  sample.erase("routing");
  r.sample = sample_from_json(sample);
  const auto& routing = j.at("routing");
  if (routing.at("status").get<std::string>() == "ok") {
    r.decision = routing_from_json(r.sample.id, routing);
  } else {
    r.failure = routing.value("error", std::string{});
  }
  return r;
}

BackendRequest prober_request(const Sample& s, const std::string& prober, int run, std::int64_t seed) {
  json media = json::array();
  for (const auto& m : s.media) media.push_back(m.uri);
  json payload = {{"task", "answer"},
                  {"sample_id", s.id},
                  {"query", s.query},
                  {"media", std::move(media)},
                  {"answer_kind", to_string(s.answer.kind)},
                  {"run", run}};
  if (s.answer.kind == AnswerKind::kMultipleChoice) {
    json opts = json::array();
    for (const auto& o : s.answer.options) opts.push_back({{"label", o.label}, {"text", o.text}});
    payload["options"] = std::move(opts);
  }
  return {prober, OpKind::kAnswer, std::move(payload), seed};
}

RouteResult route_corpus(const std::vector<Sample>& manifest, const RouterConfig& cfg, Gateway& gateway,
                         std::int64_t seed, std::size_t workers) {
  cfg.validate();
  const auto violations = validate_manifest(manifest);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!violations[i].empty()) {
      fail(ErrorCode::kInvalidArgument, "sample '" + manifest[i].id + "' invalid: " + violations[i].front());
    }
  }

  RouteResult result;
  result.samples.resize(manifest.size());
  parallel_for(manifest.size(), workers, [&](std::size_t i) {
    const Sample& s = manifest[i];
    RoutedSample& out = result.samples[i];
    out.sample = s;
    try {
      std::vector<ProberVerdict> verdicts;
      for (const auto& prober : cfg.probers) {
        for (int run = 0; run < cfg.runs_per_prober; ++run) {
          auto resp = gateway.invoke(prober_request(s, prober, run, seed));
          // A refusal is an answer that cannot be graded correct.
          std::string raw = resp.ok() ? resp.body : std::string{};
          const bool correct = resp.ok() && grade_attempt(raw, s.answer, cfg.numeric_tolerance);
          verdicts.push_back({prober, std::move(raw), correct});
        }
      }
      out.decision = decide_route(s.id, std::move(verdicts), cfg);
    } catch (const Error& e) {
      out.failure = std::string(error_code_name(e.code())) + ": " + e.what();
    }
  });
  for (const auto& r : result.samples) {
    result.stats.add(r.sample.corpus, r.decision ? std::optional(r.decision->path) : std::nullopt);
  }
  return result;
}

}  // namespace ivr
