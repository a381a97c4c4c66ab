// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "common/jsonl.hpp"
#include "model/sample.hpp"

namespace ivr {

inline constexpr std::string_view kImageStartToken = "<img_start>";
inline constexpr std::string_view kImageEndToken = "<img_end>";

enum class SegmentKind { kPlan, kImageStart, kImage, kImageEnd, kDeduct, kAnswer };
enum class RecordMode { kInterleaved, kTextual };

std::string_view to_string(SegmentKind k);
std::string_view to_string(RecordMode m);
RecordMode parse_record_mode(std::string_view s);

struct Segment {
  SegmentKind kind;
  std::string payload;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Delimited training sequence. Interleaved records carry exactly
/// [Plan, ImageStart, Image, ImageEnd, Deduct, Answer]; textual ones
/// [Plan, Deduct, Answer].
struct InterleavedRecord {
  std::string sample_id;
  RecordMode mode = RecordMode::kTextual;
  std::string image_kind;  // render kind of the Image segment, empty when textual
  std::vector<Segment> segments;

  friend bool operator==(const InterleavedRecord&, const InterleavedRecord&) = default;
};

InterleavedRecord assemble_record(const ReasoningTuple& t);

json record_to_json(const InterleavedRecord& r);
/// Throws kParse when the segment sequence violates the mode's layout.
InterleavedRecord record_from_json(const json& j);

std::string serialize_record(const InterleavedRecord& r);
InterleavedRecord parse_record(std::string_view line);

/// Plain-text rendering with the image delimiters, e.g.
/// "plan <img_start>[image:xmid/a.png]<img_end> deduct\nAnswer: B".
std::string flatten_sequence(const InterleavedRecord& r);

/// One line of the final dataset: the record plus the sample facts needed to
/// report composition.
json dataset_row(const InterleavedRecord& r, const Sample& s);

}  // namespace ivr
