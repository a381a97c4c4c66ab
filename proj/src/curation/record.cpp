// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/record.hpp"

#include <array>

#include "common/error.hpp"

namespace ivr {
namespace {

constexpr std::array kInterleavedLayout{SegmentKind::kPlan,     SegmentKind::kImageStart, SegmentKind::kImage,
                                        SegmentKind::kImageEnd, SegmentKind::kDeduct,     SegmentKind::kAnswer};
constexpr std::array kTextualLayout{SegmentKind::kPlan, SegmentKind::kDeduct, SegmentKind::kAnswer};

SegmentKind parse_segment_kind(std::string_view s) {
  for (auto k : kInterleavedLayout) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::kParse, "unknown segment kind '" + std::string(s) + "'");
}

template <std::size_t N>
bool matches(const std::vector<Segment>& segs, const std::array<SegmentKind, N>& layout) {
  if (segs.size() != N) return false;
  for (std::size_t i = 0; i < N; ++i) {
    if (segs[i].kind != layout[i]) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::kPlan: return "Plan";
    case SegmentKind::kImageStart: return "ImageStart";
    case SegmentKind::kImage: return "Image";
    case SegmentKind::kImageEnd: return "ImageEnd";
    case SegmentKind::kDeduct: return "Deduct";
    case SegmentKind::kAnswer: return "Answer";
  }
  return "Plan";
}

std::string_view to_string(RecordMode m) { return m == RecordMode::kInterleaved ? "Interleaved" : "Textual"; }

RecordMode parse_record_mode(std::string_view s) {
  if (s == "Interleaved") return RecordMode::kInterleaved;
  if (s == "Textual") return RecordMode::kTextual;
  fail(ErrorCode::kParse, "unknown record mode '" + std::string(s) + "'");
}

InterleavedRecord assemble_record(const ReasoningTuple& t) {
  check_tuple(t);
  InterleavedRecord r;
  r.sample_id = t.sample_id;
  r.segments.push_back({SegmentKind::kPlan, t.plan});
  if (t.vis) {
    r.mode = RecordMode::kInterleaved;
    r.image_kind = t.vis->render_kind;
    r.segments.push_back({SegmentKind::kImageStart, std::string(kImageStartToken)});
    r.segments.push_back({SegmentKind::kImage, t.vis->uri});
    r.segments.push_back({SegmentKind::kImageEnd, std::string(kImageEndToken)});
  }
  r.segments.push_back({SegmentKind::kDeduct, t.deduct});
  r.segments.push_back({SegmentKind::kAnswer, t.final_answer});
  return r;
}

json record_to_json(const InterleavedRecord& r) {
  json segs = json::array();
  for (const auto& s : r.segments) segs.push_back({{"kind", to_string(s.kind)}, {"payload", s.payload}});
  json j = {{"sample_id", r.sample_id}, {"mode", to_string(r.mode)}, {"segments", std::move(segs)}};
  if (!r.image_kind.empty()) j["image_kind"] = r.image_kind;
  return j;
}

InterleavedRecord record_from_json(const json& j) {
  InterleavedRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.mode = parse_record_mode(j.at("mode").get<std::string>());
    r.image_kind = j.value("image_kind", std::string{});
    for (const auto& s : j.at("segments")) {
      r.segments.push_back({parse_segment_kind(s.at("kind").get<std::string>()), s.at("payload").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("record: ") + e.what());
  }
  const bool ok = r.mode == RecordMode::kInterleaved ? matches(r.segments, kInterleavedLayout)
                                                     : matches(r.segments, kTextualLayout);
  if (!ok) fail(ErrorCode::kParse, "record " + r.sample_id + ": segment layout does not match its mode");
  return r;
}

std::string serialize_record(const InterleavedRecord& r) { return canonical_dump(record_to_json(r)); }

InterleavedRecord parse_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, e.what());
  }
  return record_from_json(j);
}

std::string flatten_sequence(const InterleavedRecord& r) {
  std::string out;
  for (const auto& s : r.segments) {
    switch (s.kind) {
      case SegmentKind::kPlan: out += s.payload; break;
      case SegmentKind::kImageStart: out += " " + s.payload; break;
      case SegmentKind::kImage: out += "[image:" + s.payload + "]"; break;
      case SegmentKind::kImageEnd: out += s.payload; break;
      case SegmentKind::kDeduct: out += " " + s.payload; break;
      case SegmentKind::kAnswer: out += "\nAnswer: " + s.payload; break;
    }
  }
  return out;
}

json dataset_row(const InterleavedRecord& r, const Sample& s) {
  json j = record_to_json(r);
  json media = json::array();
  for (const auto& m : s.media) media.push_back(m.uri);
  j["query"] = s.query;
  j["media"] = std::move(media);
  j["corpus"] = to_string(s.corpus);
  j["task_category"] = s.task_category;
  j["input_modality"] = to_string(s.input_modality);
  return j;
}

}  // namespace ivr
