// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim/fixtures.hpp"

#include <algorithm>
#include <array>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "engine/config.hpp"
#include "engine/pipeline.hpp"
#include "model/answer.hpp"
#include "model/sample.hpp"
#include "render/image.hpp"

namespace ivr {
namespace {

struct CategorySpec {
  const char* name;
  bool numeric;
  bool depth;
  const char* query;
};

constexpr std::array kCategories{
    CategorySpec{"route_plan", false, false, "Walking from the door to the window, which turn comes first?"},
    CategorySpec{"perspective_shift", false, false, "Standing at the sofa facing the TV, where is the lamp?"},
    CategorySpec{"view_change", false, false, "After the camera moves to the other side of the table, which object is leftmost?"},
    CategorySpec{"depth_oc", true, true, "How far is the marked chair from the camera, in meters?"},
    CategorySpec{"distance_oc", true, true, "What is the distance between the camera and the marked shelf?"},
    CategorySpec{"camera_distance", false, true, "Which marked object is nearest to the camera?"},
    CategorySpec{"object_count", true, false, "How many chairs are in the room?"},
    CategorySpec{"object_rel_direction", false, false, "Is the bed to the left or right of the desk?"},
    CategorySpec{"room_size", true, false, "What is the floor area of the room in square meters?"},
    CategorySpec{"navigation", true, false, "How many meters is the shortest walk from the door to the desk?"},
};

constexpr std::array kOptionTexts{"left", "right", "front", "behind", "chair", "lamp", "table", "shelf"};
constexpr std::array kMarkers{"sofa", "lamp", "desk", "plant", "door", "window"};

Corpus pick_corpus(double u) {
  if (u < 0.40) return Corpus::kSpar;
  if (u < 0.75) return Corpus::kVsi;
  return Corpus::kVlm3r;
}

std::string depth_png(int w, int h, std::uint64_t salt) {
  Gray16Image g{w, h, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool hole = x < 4 && y < 4;
      const auto v = 600 + 23 * x + 11 * y + static_cast<int>((salt >> ((x + y) % 48)) & 0x3f);
      g.pixels[static_cast<std::size_t>(y) * w + x] = hole ? 0 : static_cast<std::uint16_t>(v);
    }
  }
  return encode_png(g);
}

json base_config(std::uint64_t seed) {
  json backends = json::object();
  auto sim = [](json params) { return json{{"base_url", "sim://"}, {"sim", std::move(params)}}; };
  backends["prober-a"] = sim({{"world", "manifest.jsonl"}, {"skill", 0.95}, {"flaky_rate", 0.05}});
  backends["prober-b"] = sim({{"world", "manifest.jsonl"}, {"skill", 0.9}});
  backends["prober-c"] = sim({{"world", "manifest.jsonl"}, {"skill", 0.85}});
  backends["generator"] = sim(json::object());
  backends["judge"] = sim({{"world", "manifest.jsonl"}, {"refusal_rate", 0.01}});
  backends["examiner"] = sim({{"world", "manifest.jsonl"}, {"refusal_rate", 0.01}});
  backends["synthesizer"] =
      sim({{"world", "manifest.jsonl"}, {"inconsistency_rate", 0.04}, {"empty_plan_rate", 0.01}});
  return {{"seed", seed},
          {"workers", 0},
          {"gateway", {{"mode", "record"}, {"cassette", "cassette.jsonl"}}},
          {"retry", {{"max_attempts", 3}, {"base_delay_ms", 1}, {"multiplier", 2.0}, {"max_in_flight", 4}}},
          {"backends", backends},
          {"router", {{"probers", {"prober-a", "prober-b", "prober-c"}}, {"runs_per_prober", 1}, {"threshold", {2, 3}}}},
          {"renderer", {{"generator", "generator"}, {"keyframe_budget", 8}}},
          {"verifier", {{"judge", "judge"}, {"examiner", "examiner"}}},
          {"backfill", {{"synthesizer", "synthesizer"}, {"structure_interleaved", true}}},
          {"balance", {{"target_ratio", 0.4786}}},
          {"protocol", {{"name", "spar"}}}};
}

}  // namespace

void write_reference_composition(const std::filesystem::path& path) {
  constexpr std::size_t kTotal = 31503, kInterleaved = 15077, kSpar = 15189, kVsi = 8157;
  std::vector<json> rows;
  rows.reserve(kTotal);
  for (std::size_t i = 0; i < kTotal; ++i) {
    // interleaved rows are spread evenly over the corpus order
    const bool inter = (i * kInterleaved) / kTotal != ((i + 1) * kInterleaved) / kTotal;
    const char* corpus = i < kSpar ? "SPAR" : i < kSpar + kVsi ? "VSI" : "VLM3R";
    const char* modality = i < kSpar ? (i % 3 == 0 ? "SingleImage" : "MultiView") : "VideoFrames";
    rows.push_back({{"sample_id", "c" + std::to_string(i)},
                    {"mode", inter ? "Interleaved" : "Textual"},
                    {"corpus", corpus},
                    {"task_category", kCategories[i % kCategories.size()].name},
                    {"input_modality", modality}});
  }
  write_jsonl(path, rows);
}

json write_replay_fixture(const std::filesystem::path& dir, std::size_t n_samples, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "media");
  Rng rng(seed);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Sample s;
    s.id = "s" + std::to_string(1000 + i);
    s.corpus = pick_corpus(uniform01(rng));
    const auto& cat = kCategories[uniform_below(rng, kCategories.size())];
    s.task_category = cat.name;
    s.query = cat.query;
    const int w = 64, h = 48;
    if (s.corpus == Corpus::kSpar) {
      s.input_modality = uniform01(rng) < 0.5 ? InputModality::kSingleImage : InputModality::kMultiView;
      const int views = s.input_modality == InputModality::kSingleImage ? 1 : 3;
      for (int v = 0; v < views; ++v) {
        s.media.push_back({"media/" + s.id + "_view" + std::to_string(v) + ".jpg", MediaKind::kRgb, 640, 480});
      }
    } else {
      s.input_modality = InputModality::kVideoFrames;
      const int frames = 12 + static_cast<int>(uniform_below(rng, 12));
      for (int f = 0; f < frames; ++f) {
        s.media.push_back({"media/" + s.id + "_f" + std::to_string(f) + ".jpg", MediaKind::kRgb, 640, 480});
      }
      s.frame_count = frames;
    }
    if (cat.depth) {
      const std::string uri = "media/" + s.id + "_depth.png";
      write_file(dir / uri, depth_png(w, h, rng()));
      s.media.push_back({uri, MediaKind::kDepthGrid, w, h});
      if (s.input_modality == InputModality::kVideoFrames) {
        // depth rides alongside the frames; keep frame_count equal to media length
        s.frame_count = static_cast<int>(s.media.size());
      }
      json boxes = json::array();
      const int nb = 1 + static_cast<int>(uniform_below(rng, 3));
      for (int b = 0; b < nb; ++b) {
        boxes.push_back({{"x", 6 + 18 * b}, {"y", 8 + 5 * b}, {"w", 14}, {"h", 16}, {"label", b + 1}});
      }
      s.extra["boxes"] = boxes;
    }
    json markers = json::array();
    for (int m = 0; m < 3; ++m) markers.push_back(kMarkers[(i + static_cast<std::size_t>(m) * 2) % kMarkers.size()]);
    if (cat.numeric) {
      // tenths keep answers clear of the small integers used in box labels
      double value = static_cast<double>(15 + uniform_below(rng, 60)) / 10.0;
      if (value == std::floor(value)) value += 0.3;
      s.answer = AnswerSpec::numeric(value, "m");
      const double leak_rate = std::string(cat.name) == "navigation" ? 0.3 : 0.04;
      if (uniform01(rng) < leak_rate) markers.push_back(format_number(value));  // unavoidable leakage
    } else {
      std::vector<std::string> labels{"A", "B", "C", "D"};
      s.answer = AnswerSpec::multiple_choice(labels, labels[uniform_below(rng, 4)]);
      const auto base = uniform_below(rng, kOptionTexts.size());
      for (std::size_t k = 0; k < s.answer.options.size(); ++k) {
        s.answer.options[k].text = kOptionTexts[(base + k) % kOptionTexts.size()];
      }
    }
    s.extra["markers"] = markers;
    if (std::string(cat.name) == "perspective_shift") s.extra["target_viewpoint"] = "sofa, facing the TV";
    samples.push_back(std::move(s));
  }
  save_manifest(dir / "manifest.jsonl", samples);

  json record = base_config(seed);
  write_file(dir / "config.record.json", record.dump(2) + "\n");
  fs::remove(dir / "cassette.jsonl");

  auto cfg = load_engine_config(dir / "config.record.json");
  auto gw = make_gateway(cfg);
  const auto scratch = dir / ".record";
  json summary = run_pipeline(cfg, *gw, dir / "manifest.jsonl", scratch, dir);
  gw.reset();
  fs::remove_all(scratch);

  // recording order and wall-clock latency depend on scheduling; store
  // entries sorted by hash with latency cleared
  auto entries = read_jsonl(dir / "cassette.jsonl");
  for (auto& e : entries) e["response"]["latency_ms"] = 0;
  std::sort(entries.begin(), entries.end(), [](const json& a, const json& b) {
    return a.at("request_hash").get<std::string>() < b.at("request_hash").get<std::string>();
  });
  write_jsonl(dir / "cassette.jsonl", entries);

  json replay = record;
  replay["gateway"]["mode"] = "replay";
  for (auto& [id, b] : replay["backends"].items()) {
    b = {{"base_url", "http://127.0.0.1:9/" + id}, {"headers", {{"Authorization", "Bearer ${API_KEY}"}}}};
  }
  write_file(dir / "config.json", replay.dump(2) + "\n");
  summary["cassette_entries"] = entries.size();
  return summary;
}

}  // namespace ivr
