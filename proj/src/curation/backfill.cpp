// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/backfill.hpp"

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "model/answer.hpp"
#include "router/router.hpp"

namespace ivr {
namespace {

json base_payload(const Sample& s, std::string_view task) {
  json media = json::array();
  for (const auto& m : s.media) media.push_back(m.uri);
  json p = {{"task", task},
            {"sample_id", s.id},
            {"query", s.query},
            {"media", std::move(media)},
            {"answer_kind", to_string(s.answer.kind)},
            {"gold_answer", gold_answer_text(s.answer)}};
  if (s.answer.kind == AnswerKind::kMultipleChoice) {
    json opts = json::array();
    for (const auto& o : s.answer.options) opts.push_back({{"label", o.label}, {"text", o.text}});
    p["options"] = std::move(opts);
  }
  return p;
}

enum class Slot { kNone, kTextual, kInterleaved };

struct Outcome {
  Slot slot = Slot::kNone;
  std::optional<TupleLine> line;
  std::string dropped;
};

Outcome synthesize(const Sample& s, const std::optional<RenderedImage>& vis, const BackfillConfig& cfg,
                   Gateway& gateway, std::int64_t seed) {
  Outcome out;
  out.slot = vis ? Slot::kInterleaved : Slot::kTextual;
  try {
    auto req = vis ? interleaved_chain_request(s, *vis, cfg.synthesizer, seed)
                   : textual_chain_request(s, cfg.synthesizer, seed);
    auto resp = gateway.invoke(req);
    if (!resp.ok()) {
      out.dropped = "Refused";
      return out;
    }
    auto chain = accept_chain(resp.body, s.answer, cfg.numeric_tolerance);
    TupleLine line;
    line.sample = s;
    line.mode = vis ? RecordMode::kInterleaved : RecordMode::kTextual;
    line.tuple = {s.id, chain.plan, vis, chain.deduct, gold_answer_text(s.answer)};
    out.line = std::move(line);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) {
      out.dropped = e.what();
    } else {
      out.dropped = std::string(error_code_name(e.code()));
    }
  }
  return out;
}

BackfillResult collect(std::vector<Outcome>& outcomes) {
  BackfillResult r;
  for (auto& o : outcomes) {
    if (o.slot == Slot::kNone) continue;
    auto& c = o.slot == Slot::kTextual ? r.stats.textual : r.stats.interleaved;
    ++c.candidates;
    if (o.line) {
      ++c.accepted;
      r.tuples.push_back(std::move(*o.line));
    } else {
      ++c.dropped[o.dropped];
    }
  }
  return r;
}

}  // namespace

void BackfillConfig::validate() const {
  if (synthesizer.empty()) fail(ErrorCode::kConfig, "backfill.synthesizer must name a backend");
  if (!(numeric_tolerance >= 0.0)) fail(ErrorCode::kConfig, "backfill.numeric_tolerance must be >= 0");
}

std::string gold_answer_text(const AnswerSpec& a) {
  if (a.kind == AnswerKind::kMultipleChoice) {
    std::string g = a.label;
    for (auto& c : g) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return g;
  }
  return format_number(a.number);
}

BackendRequest textual_chain_request(const Sample& s, const std::string& synthesizer, std::int64_t seed) {
  return {synthesizer, OpKind::kSynthesize, base_payload(s, "textual_chain"), seed};
}

BackendRequest interleaved_chain_request(const Sample& s, const RenderedImage& vis, const std::string& synthesizer,
                                         std::int64_t seed) {
  json p = base_payload(s, "interleaved_chain");
  p["image"] = {{"uri", vis.uri}, {"render_kind", vis.render_kind}};
  return {synthesizer, OpKind::kSynthesize, std::move(p), seed};
}

ChainParts accept_chain(std::string_view body, const AnswerSpec& gold, double tol) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("plan") || !j.at("plan").is_string() ||
      !j.contains("deduct") || !j.at("deduct").is_string() ||
      (j.contains("answer") && !j.at("answer").is_string())) {
    fail(ErrorCode::kMalformedResponse, "chain reply is not {plan, deduct, answer?}");
  }
  ChainParts c{j.at("plan").get<std::string>(), j.at("deduct").get<std::string>(), {}};
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; };
  if (blank(c.plan)) fail(ErrorCode::kInvalidArgument, "EmptyPlan");
  if (blank(c.deduct)) fail(ErrorCode::kInvalidArgument, "EmptyDeduct");
  c.answer_text = j.contains("answer") ? j.at("answer").get<std::string>() : c.deduct;
  if (!grade_attempt(c.answer_text, gold, tol)) {
    fail(ErrorCode::kInconsistentChain, "chain answer does not match gold " + gold_answer_text(gold));
  }
  return c;
}

BackfillCounts& BackfillCounts::operator+=(const BackfillCounts& o) {
  candidates += o.candidates;
  accepted += o.accepted;
  for (const auto& [k, v] : o.dropped) dropped[k] += v;
  return *this;
}

json BackfillStats::to_json() const {
  auto one = [](const BackfillCounts& c) {
    return json{{"candidates", c.candidates}, {"accepted", c.accepted}, {"dropped", c.dropped}};
  };
  return {{"textual", one(textual)}, {"interleaved", one(interleaved)}};
}

json to_json(const TupleLine& t) {
  json j = {{"sample", to_json(t.sample)}, {"mode", to_string(t.mode)}, {"tuple", to_json(t.tuple)}};
  if (t.verification) j["verification"] = to_json(*t.verification);
  return j;
}

TupleLine tuple_line_from_json(const json& j) {
  TupleLine t;
  t.sample = sample_from_json(j.at("sample"));
  t.mode = parse_record_mode(j.at("mode").get<std::string>());
  t.tuple = tuple_from_json(j.at("tuple"));
  if (j.contains("verification")) t.verification = trail_from_json(j.at("verification"));
  return t;
}

BackfillResult backfill_corpus(const std::vector<VerifiedSample>& verified, const BackfillConfig& cfg,
                               Gateway& gateway, std::int64_t seed, std::size_t workers) {
  cfg.validate();
  std::vector<Outcome> outcomes(verified.size());
  parallel_for(verified.size(), workers, [&](std::size_t i) {
    const auto& v = verified[i];
    const auto& routed = v.rendered.routed;
    if (!routed.decision) return;
    if (routed.decision->path == RoutePath::kTextPath) {
      outcomes[i] = synthesize(routed.sample, std::nullopt, cfg, gateway, seed);
      return;
    }
    if (!cfg.structure_interleaved || !v.trail || v.trail->final_verdict != FinalVerdict::kRetained) return;
    const auto& x = v.rendered.render.x_mid;
    if (!x) return;
    RenderedImage vis{x->uri, std::string(to_string(v.rendered.render.kind))};
    outcomes[i] = synthesize(routed.sample, vis, cfg, gateway, seed);
    if (outcomes[i].line) outcomes[i].line->verification = v.trail;
  });
  return collect(outcomes);
}

BackfillResult backfill_textual(const std::vector<RoutedSample>& candidates, const BackfillConfig& cfg,
                                Gateway& gateway, std::int64_t seed, std::size_t workers) {
  cfg.validate();
  for (const auto& c : candidates) {
    if (!c.decision || c.decision->path != RoutePath::kTextPath) {
      fail(ErrorCode::kInvalidArgument, "backfill candidate '" + c.sample.id + "' is not on the text path");
    }
  }
  std::vector<Outcome> outcomes(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    outcomes[i] = synthesize(candidates[i].sample, std::nullopt, cfg, gateway, seed);
  });
  return collect(outcomes);
}

}  // namespace ivr
