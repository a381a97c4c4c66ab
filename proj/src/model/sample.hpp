// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "common/jsonl.hpp"

namespace ivr {

enum class Corpus { kSpar, kVsi, kVlm3r, kOther };
enum class InputModality { kSingleImage, kMultiView, kVideoFrames };
enum class MediaKind { kRgb, kDepthGrid };
enum class AnswerKind { kMultipleChoice, kNumeric };

std::string_view to_string(Corpus c);
std::string_view to_string(InputModality m);
std::string_view to_string(MediaKind k);
std::string_view to_string(AnswerKind k);
Corpus parse_corpus(std::string_view s);
InputModality parse_modality(std::string_view s);

struct MediaRef {
  std::string uri;
  MediaKind kind = MediaKind::kRgb;
  int width = 0;
  int height = 0;

  friend bool operator==(const MediaRef&, const MediaRef&) = default;
};

struct McOption {
  std::string label;
  std::string text;

  friend bool operator==(const McOption&, const McOption&) = default;
};

/// Gold answer. For kMultipleChoice `label` is the correct option label; for
/// kNumeric `number` holds the value and `unit` is an opaque tag.
struct AnswerSpec {
  AnswerKind kind = AnswerKind::kMultipleChoice;
  std::vector<McOption> options;
  std::string label;
  double number = 0.0;
  std::string unit;

  static AnswerSpec multiple_choice(std::vector<std::string> labels, std::string gold);
  static AnswerSpec numeric(double value, std::string unit = {});

  bool has_label(std::string_view l) const;
  friend bool operator==(const AnswerSpec&, const AnswerSpec&) = default;
};

struct Sample {
  std::string id;
  std::string query;
  std::vector<MediaRef> media;
  AnswerSpec answer;
  Corpus corpus = Corpus::kOther;
  std::string task_category;
  InputModality input_modality = InputModality::kSingleImage;
  int frame_count = 0;
  json extra = json::object();  // unknown manifest fields, preserved verbatim

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct RenderedImage {
  std::string uri;
  std::string render_kind;  // "BEV", "POV" or "DepthOverlay"

  friend bool operator==(const RenderedImage&, const RenderedImage&) = default;
};

/// Plan / optional visual / deduction triple. `vis` is empty on the textual path.
struct ReasoningTuple {
  std::string sample_id;
  std::string plan;
  std::optional<RenderedImage> vis;
  std::string deduct;
  std::string final_answer;

  friend bool operator==(const ReasoningTuple&, const ReasoningTuple&) = default;
};

json to_json(const MediaRef& m);
json to_json(const AnswerSpec& a);
json to_json(const Sample& s);
json to_json(const ReasoningTuple& t);
MediaRef media_from_json(const json& j);
AnswerSpec answer_from_json(const json& j);
Sample sample_from_json(const json& j);
ReasoningTuple tuple_from_json(const json& j);

std::vector<Sample> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const std::vector<Sample>& samples);

/// Every type-invariant violation of one sample; empty means valid.
std::vector<std::string> validate_sample(const Sample& s);

/// Per-sample violations plus manifest-level ones (duplicate ids). Index i of
/// the result belongs to samples[i].
std::vector<std::vector<std::string>> validate_manifest(const std::vector<Sample>& samples);

/// Throws kInvalidArgument if the tuple breaks its invariants.
void check_tuple(const ReasoningTuple& t);

}  // namespace ivr
