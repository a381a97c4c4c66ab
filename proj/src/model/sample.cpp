// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/sample.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include "common/error.hpp"

namespace ivr {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <class T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::kParse, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("field '") + key + "': " + e.what());
  }
}

const std::set<std::string>& sample_keys() {
  static const std::set<std::string> keys = {"id",     "query",         "media",          "answer",
                                             "corpus", "task_category", "input_modality", "frame_count"};
  return keys;
}

}  // namespace

std::string_view to_string(Corpus c) {
  switch (c) {
    case Corpus::kSpar: return "SPAR";
    case Corpus::kVsi: return "VSI";
    case Corpus::kVlm3r: return "VLM3R";
    case Corpus::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(InputModality m) {
  switch (m) {
    case InputModality::kSingleImage: return "SingleImage";
    case InputModality::kMultiView: return "MultiView";
    case InputModality::kVideoFrames: return "VideoFrames";
  }
  return "SingleImage";
}

std::string_view to_string(MediaKind k) { return k == MediaKind::kRgb ? "RGB" : "DepthGrid"; }

std::string_view to_string(AnswerKind k) { return k == AnswerKind::kMultipleChoice ? "MultipleChoice" : "Numeric"; }

Corpus parse_corpus(std::string_view s) {
  if (s == "SPAR") return Corpus::kSpar;
  if (s == "VSI") return Corpus::kVsi;
  if (s == "VLM3R") return Corpus::kVlm3r;
  if (s == "OTHER") return Corpus::kOther;
  fail(ErrorCode::kParse, "unknown corpus '" + std::string(s) + "'");
}

InputModality parse_modality(std::string_view s) {
  if (s == "SingleImage") return InputModality::kSingleImage;
  if (s == "MultiView") return InputModality::kMultiView;
  if (s == "VideoFrames") return InputModality::kVideoFrames;
  fail(ErrorCode::kParse, "unknown input_modality '" + std::string(s) + "'");
}

AnswerSpec AnswerSpec::multiple_choice(std::vector<std::string> labels, std::string gold) {
  AnswerSpec a;
  a.kind = AnswerKind::kMultipleChoice;
  for (auto& l : labels) a.options.push_back({std::move(l), {}});
  a.label = std::move(gold);
  return a;
}

AnswerSpec AnswerSpec::numeric(double value, std::string unit) {
  AnswerSpec a;
  a.kind = AnswerKind::kNumeric;
  a.number = value;
  a.unit = std::move(unit);
  return a;
}

bool AnswerSpec::has_label(std::string_view l) const {
  const std::string u = upper(l);
  return std::any_of(options.begin(), options.end(), [&](const McOption& o) { return upper(o.label) == u; });
}

json to_json(const MediaRef& m) {
  return {{"uri", m.uri}, {"kind", to_string(m.kind)}, {"width", m.width}, {"height", m.height}};
}

json to_json(const AnswerSpec& a) {
  json j = {{"kind", to_string(a.kind)}};
  if (a.kind == AnswerKind::kMultipleChoice) {
    json opts = json::array();
    for (const auto& o : a.options) {
      json oj = {{"label", o.label}};
      if (!o.text.empty()) oj["text"] = o.text;
      opts.push_back(std::move(oj));
    }
    j["mc_options"] = std::move(opts);
    j["value"] = a.label;
  } else {
    j["value"] = a.number;
    if (!a.unit.empty()) j["unit"] = a.unit;
  }
  return j;
}

json to_json(const Sample& s) {
  json j = s.extra.is_object() ? s.extra : json::object();
  json media = json::array();
  for (const auto& m : s.media) media.push_back(to_json(m));
  j["id"] = s.id;
  j["query"] = s.query;
  j["media"] = std::move(media);
  j["answer"] = to_json(s.answer);
  j["corpus"] = to_string(s.corpus);
  j["task_category"] = s.task_category;
  j["input_modality"] = to_string(s.input_modality);
  j["frame_count"] = s.frame_count;
  return j;
}

json to_json(const ReasoningTuple& t) {
  json j = {{"sample_id", t.sample_id}, {"plan", t.plan}, {"deduct", t.deduct}, {"final_answer", t.final_answer}};
  j["vis"] = t.vis ? json{{"uri", t.vis->uri}, {"render_kind", t.vis->render_kind}} : json(nullptr);
  return j;
}

MediaRef media_from_json(const json& j) {
  MediaRef m;
  m.uri = required<std::string>(j, "uri");
  const auto kind = required<std::string>(j, "kind");
  if (kind == "RGB") {
    m.kind = MediaKind::kRgb;
  } else if (kind == "DepthGrid") {
    m.kind = MediaKind::kDepthGrid;
  } else {
    fail(ErrorCode::kParse, "unknown media kind '" + kind + "'");
  }
  m.width = required<int>(j, "width");
  m.height = required<int>(j, "height");
  return m;
}

AnswerSpec answer_from_json(const json& j) {
  AnswerSpec a;
  const auto kind = required<std::string>(j, "kind");
  if (kind == "MultipleChoice") {
    a.kind = AnswerKind::kMultipleChoice;
    for (const auto& o : required<json>(j, "mc_options")) {
      if (o.is_string()) {
        a.options.push_back({o.get<std::string>(), {}});
      } else {
        a.options.push_back({required<std::string>(o, "label"), o.value("text", std::string{})});
      }
    }
    a.label = required<std::string>(j, "value");
  } else if (kind == "Numeric") {
    a.kind = AnswerKind::kNumeric;
    a.number = required<double>(j, "value");
    a.unit = j.value("unit", std::string{});
  } else {
    fail(ErrorCode::kParse, "unknown answer kind '" + kind + "'");
  }
  return a;
}

Sample sample_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kParse, "sample is not a JSON object");
  Sample s;
  s.id = required<std::string>(j, "id");
  s.query = required<std::string>(j, "query");
  for (const auto& m : required<json>(j, "media")) s.media.push_back(media_from_json(m));
  s.answer = answer_from_json(required<json>(j, "answer"));
  s.corpus = parse_corpus(required<std::string>(j, "corpus"));
  s.task_category = required<std::string>(j, "task_category");
  s.input_modality = parse_modality(required<std::string>(j, "input_modality"));
  s.frame_count = required<int>(j, "frame_count");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!sample_keys().count(it.key())) s.extra[it.key()] = it.value();
  }
  return s;
}

ReasoningTuple tuple_from_json(const json& j) {
  ReasoningTuple t;
  t.sample_id = required<std::string>(j, "sample_id");
  t.plan = required<std::string>(j, "plan");
  t.deduct = required<std::string>(j, "deduct");
  t.final_answer = required<std::string>(j, "final_answer");
  if (auto it = j.find("vis"); it != j.end() && !it->is_null()) {
    t.vis = RenderedImage{required<std::string>(*it, "uri"), required<std::string>(*it, "render_kind")};
  }
  return t;
}

std::vector<Sample> load_manifest(const std::filesystem::path& path) {
  std::vector<Sample> out;
  std::size_t line = 0;
  for (const auto& row : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(sample_from_json(row));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(to_json(s));
  write_jsonl(path, rows);
}

std::vector<std::string> validate_sample(const Sample& s) {
  std::vector<std::string> v;
  if (s.id.empty()) v.emplace_back("id non-empty");
  if (s.media.empty()) v.emplace_back("media non-empty");
  for (const auto& m : s.media) {
    if (m.width <= 0 || m.height <= 0) {
      v.emplace_back("media dimensions positive: " + m.uri);
      break;
    }
  }
  if (s.frame_count < 0) v.emplace_back("frame_count non-negative");
  if (s.input_modality == InputModality::kVideoFrames && s.frame_count != static_cast<int>(s.media.size())) {
    v.emplace_back("frame_count mismatch");
  }
  if (s.answer.kind == AnswerKind::kMultipleChoice) {
    if (!s.answer.has_label(s.answer.label)) v.emplace_back("answer value among mc_options");
  } else if (!std::isfinite(s.answer.number)) {
    v.emplace_back("numeric answer finite");
  }
  return v;
}

std::vector<std::vector<std::string>> validate_manifest(const std::vector<Sample>& samples) {
  std::vector<std::vector<std::string>> out;
  out.reserve(samples.size());
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    auto v = validate_sample(s);
    if (!s.id.empty() && !seen.insert(s.id).second) v.emplace_back("id unique");
    out.push_back(std::move(v));
  }
  return out;
}

void check_tuple(const ReasoningTuple& t) {
  if (t.plan.empty()) fail(ErrorCode::kInvalidArgument, "tuple " + t.sample_id + ": empty plan");
  if (t.deduct.empty()) fail(ErrorCode::kInvalidArgument, "tuple " + t.sample_id + ": empty deduction");
  if (t.vis && t.vis->uri.empty()) fail(ErrorCode::kInvalidArgument, "tuple " + t.sample_id + ": empty image uri");
}

}  // namespace ivr
