// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "verify/verifier.hpp"

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/parallel.hpp"
#include "router/router.hpp"

namespace ivr {
namespace {

json options_json(const AnswerSpec& a) {
  json opts = json::array();
  for (const auto& o : a.options) opts.push_back({{"label", o.label}, {"text", o.text}});
  return opts;
}

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

FinalVerdict parse_final(std::string_view s) {
  for (auto v : {FinalVerdict::kRetained, FinalVerdict::kRejectedLeakage, FinalVerdict::kRejectedFactuality,
                 FinalVerdict::kRejectedBlindTest, FinalVerdict::kUnverified}) {
    if (to_string(v) == s) return v;
  }
  fail(ErrorCode::kParse, "unknown final verdict '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(FactualityResult r) {
  switch (r) {
    case FactualityResult::kPass: return "pass";
    case FactualityResult::kFail: return "fail";
    case FactualityResult::kUnverified: return "unverified";
  }
  return "unverified";
}

std::string_view to_string(BlindResult r) {
  switch (r) {
    case BlindResult::kKeep: return "keep";
    case BlindResult::kDiscard: return "discard";
    case BlindResult::kUnverified: return "unverified";
  }
  return "unverified";
}

std::string_view to_string(FinalVerdict v) {
  switch (v) {
    case FinalVerdict::kRetained: return "Retained";
    case FinalVerdict::kRejectedLeakage: return "RejectedLeakage";
    case FinalVerdict::kRejectedFactuality: return "RejectedFactuality";
    case FinalVerdict::kRejectedBlindTest: return "RejectedBlindTest";
    case FinalVerdict::kUnverified: return "Unverified";
  }
  return "Unverified";
}

json to_json(const VerificationTrail& t) {
  json j = {{"sample_id", t.sample_id}, {"leakage", to_json(t.leakage)}, {"final", to_string(t.final_verdict)}};
  j["factuality"] = t.factuality ? json{{"result", to_string(t.factuality->result)}, {"reason", t.factuality->reason}}
                                 : json(nullptr);
  j["blind_test"] = t.blind_test ? json{{"result", to_string(t.blind_test->result)},
                                        {"examiner_answer", t.blind_test->examiner_answer}}
                                 : json(nullptr);
  return j;
}

VerificationTrail trail_from_json(const json& j) {
  VerificationTrail t;
  t.sample_id = j.at("sample_id").get<std::string>();
  t.leakage = leakage_from_json(j.at("leakage"));
  t.final_verdict = parse_final(j.at("final").get<std::string>());
  if (!j.at("factuality").is_null()) {
    const auto& f = j.at("factuality");
    const auto r = f.at("result").get<std::string>();
    t.factuality = FactualityOutcome{r == "pass"   ? FactualityResult::kPass
                                     : r == "fail" ? FactualityResult::kFail
                                                   : FactualityResult::kUnverified,
                                     f.value("reason", std::string{})};
  }
  if (!j.at("blind_test").is_null()) {
    const auto& b = j.at("blind_test");
    const auto r = b.at("result").get<std::string>();
    t.blind_test = BlindOutcome{r == "keep"      ? BlindResult::kKeep
                                : r == "discard" ? BlindResult::kDiscard
                                                 : BlindResult::kUnverified,
                                b.value("examiner_answer", std::string{})};
  }
  return t;
}

BackendRequest factuality_request(const Sample& s, RenderKind kind, const ImageBlob& image, const std::string& judge,
                                  std::int64_t seed) {
  json payload = {{"task", "factuality"},
                  {"sample_id", s.id},
                  {"query", s.query},
                  {"render_kind", to_string(kind)},
                  {"image", {{"sha256", image.sha256}, {"png_base64", base64_encode(image.bytes)}}}};
  return {judge, OpKind::kJudge, std::move(payload), seed};
}

BackendRequest blind_test_request(const Sample& s, const ImageBlob& image, const std::string& examiner,
                                  std::int64_t seed) {
  json payload = {{"task", "blind_test"},
                  {"sample_id", s.id},
                  {"query", s.query},
                  {"answer_kind", to_string(s.answer.kind)},
                  {"images", json::array({{{"sha256", image.sha256}, {"png_base64", base64_encode(image.bytes)}}})}};
  if (s.answer.kind == AnswerKind::kMultipleChoice) payload["options"] = options_json(s.answer);
  return {examiner, OpKind::kAnswer, std::move(payload), seed};
}

FactualityOutcome factuality_check(const Sample& s, RenderKind kind, const ImageBlob& image, const std::string& judge,
                                   Gateway& gateway, std::int64_t seed) {
  BackendResponse resp;
  try {
    resp = gateway.invoke(factuality_request(s, kind, image, judge, seed));
  } catch (const Error& e) {
    return {FactualityResult::kUnverified, std::string(error_code_name(e.code())) + ": " + e.what()};
  }
  if (!resp.ok()) return {FactualityResult::kUnverified, "judge refused"};
  try {
    const auto j = json::parse(resp.body);
    const auto verdict = j.at("verdict").get<std::string>();
    const auto reason = j.value("reason", std::string{});
    if (verdict == "pass") return {FactualityResult::kPass, reason};
    if (verdict == "fail") return {FactualityResult::kFail, reason};
  } catch (const json::exception&) {
  }
  return {FactualityResult::kUnverified, "MalformedJudgeResponse"};
}

BlindOutcome blind_test(const Sample& s, const ImageBlob& image, const std::string& examiner, double tol,
                        Gateway& gateway, std::int64_t seed) {
  BackendResponse resp;
  try {
    resp = gateway.invoke(blind_test_request(s, image, examiner, seed));
  } catch (const Error& e) {
    return {BlindResult::kUnverified, std::string(error_code_name(e.code())) + ": " + e.what()};
  }
  // A refusal to answer is a failure to reach the gold answer.
  if (!resp.ok()) return {BlindResult::kDiscard, {}};
  return {grade_attempt(resp.body, s.answer, tol) ? BlindResult::kKeep : BlindResult::kDiscard, resp.body};
}

void VerifierConfig::validate() const {
  if (judge.empty()) fail(ErrorCode::kConfig, "verifier.judge must name a backend");
  if (examiner.empty()) fail(ErrorCode::kConfig, "verifier.examiner must name a backend");
  if (!(numeric_tolerance >= 0.0)) fail(ErrorCode::kConfig, "verifier.numeric_tolerance must be >= 0");
}

VerificationTrail verify_sample(const Sample& s, const RenderRecord& render, const ImageBlob& image,
                                const VerifierConfig& cfg, Gateway& gateway, std::int64_t seed) {
  VerificationTrail t;
  t.sample_id = s.id;
  std::vector<std::string> texts;
  if (render.prompt) texts = render.prompt->texts();
  t.leakage = lint_zero_leakage(texts, s.answer);
  if (!t.leakage.pass) {
    t.final_verdict = FinalVerdict::kRejectedLeakage;
    return t;
  }
  t.factuality = factuality_check(s, render.kind, image, cfg.judge, gateway, seed);
  if (t.factuality->result == FactualityResult::kFail) {
    t.final_verdict = FinalVerdict::kRejectedFactuality;
    return t;
  }
  if (t.factuality->result == FactualityResult::kUnverified) {
    t.final_verdict = FinalVerdict::kUnverified;
    return t;
  }
  t.blind_test = blind_test(s, image, cfg.examiner, cfg.numeric_tolerance, gateway, seed);
  switch (t.blind_test->result) {
    case BlindResult::kKeep: t.final_verdict = FinalVerdict::kRetained; break;
    case BlindResult::kDiscard: t.final_verdict = FinalVerdict::kRejectedBlindTest; break;
    case BlindResult::kUnverified: t.final_verdict = FinalVerdict::kUnverified; break;
  }
  return t;
}

double StageCounts::stage1_rate() const { return ratio(stage1_rejected, candidates - unverified_stage1); }

double StageCounts::stage2_rate() const { return ratio(stage2_rejected, stage2_entrants() - unverified_stage2); }

double StageCounts::retention() const { return ratio(retained, candidates); }

StageCounts& StageCounts::operator+=(const StageCounts& o) {
  candidates += o.candidates;
  leakage_rejected += o.leakage_rejected;
  stage1_rejected += o.stage1_rejected;
  stage2_rejected += o.stage2_rejected;
  retained += o.retained;
  unverified_stage1 += o.unverified_stage1;
  unverified_stage2 += o.unverified_stage2;
  return *this;
}

void StageStats::add(const std::string& corpus, const VerificationTrail& trail) {
  StageCounts c;
  c.candidates = 1;
  switch (trail.final_verdict) {
    case FinalVerdict::kRetained: c.retained = 1; break;
    case FinalVerdict::kRejectedLeakage:
      c.leakage_rejected = 1;
      c.stage1_rejected = 1;
      break;
    case FinalVerdict::kRejectedFactuality: c.stage1_rejected = 1; break;
    case FinalVerdict::kRejectedBlindTest: c.stage2_rejected = 1; break;
    case FinalVerdict::kUnverified:
      if (trail.blind_test) {
        c.unverified_stage2 = 1;
      } else {
        c.unverified_stage1 = 1;
      }
      break;
  }
  per_corpus[corpus] += c;
  overall += c;
}

void StageStats::merge(const StageStats& other) {
  for (const auto& [k, v] : other.per_corpus) per_corpus[k] += v;
  overall += other.overall;
}

namespace {

json counts_json(const StageCounts& c) {
  return {{"candidates", c.candidates},
          {"leakage_rejected", c.leakage_rejected},
          {"stage1_rejected", c.stage1_rejected},
          {"stage2_rejected", c.stage2_rejected},
          {"retained", c.retained},
          {"unverified", c.unverified()},
          {"unverified_stage1", c.unverified_stage1},
          {"unverified_stage2", c.unverified_stage2},
          {"stage1_rate", c.stage1_rate()},
          {"stage2_rate", c.stage2_rate()},
          {"retention", c.retention()}};
}

}  // namespace

json StageStats::to_json() const {
  json columns = json::array();
  json factuality = json::object();
  json blind = json::object();
  json per = json::object();
  for (const auto& [corpus, c] : per_corpus) {
    columns.push_back(corpus);
    factuality[corpus] = 100.0 * c.stage1_rate();
    blind[corpus] = 100.0 * c.stage2_rate();
    per[corpus] = counts_json(c);
  }
  return {{"columns", std::move(columns)},
          {"rows", {{"Factuality Check", std::move(factuality)}, {"Blind Test", std::move(blind)}}},
          {"unit", "percent"},
          {"per_corpus", std::move(per)},
          {"overall", counts_json(overall)}};
}

StageStats stage_statistics(const std::vector<std::pair<std::string, VerificationTrail>>& trails) {
  StageStats s;
  for (const auto& [corpus, t] : trails) s.add(corpus, t);
  return s;
}

json to_json(const VerifiedSample& v) {
  json j = to_json(v.rendered);
  j["verification"] = v.trail ? to_json(*v.trail) : json(nullptr);
  return j;
}

VerifiedSample verified_from_json(const json& j) {
  VerifiedSample v;
  json rendered = j;
  rendered.erase("verification");
  v.rendered = rendered_from_json(rendered);
  if (j.contains("verification") && !j.at("verification").is_null()) v.trail = trail_from_json(j.at("verification"));
  return v;
}

VerifyResult verify_corpus(const std::vector<RenderedSample>& rendered, const VerifierConfig& cfg, Gateway& gateway,
                           const std::filesystem::path& rendered_dir, std::int64_t seed, std::size_t workers) {
  cfg.validate();
  VerifyResult result;
  result.samples.resize(rendered.size());
  parallel_for(rendered.size(), workers, [&](std::size_t i) {
    const auto& r = rendered[i];
    auto& out = result.samples[i];
    out.rendered = r;
    if (r.render.status != RenderStatus::kRendered || !r.render.x_mid) return;
    const auto& x = *r.render.x_mid;
    ImageBlob blob{read_file(rendered_dir / x.uri), x.sha256};
    if (sha256_hex(blob.bytes) != x.sha256) fail(ErrorCode::kIo, "x_mid digest mismatch for " + r.routed.sample.id);
    out.trail = verify_sample(r.routed.sample, r.render, blob, cfg, gateway, seed);
  });
  for (const auto& v : result.samples) {
    if (v.trail) result.stats.add(std::string(to_string(v.rendered.routed.sample.corpus)), *v.trail);
  }
  return result;
}

}  // namespace ivr
