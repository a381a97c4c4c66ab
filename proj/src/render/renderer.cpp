// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "render/renderer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/parallel.hpp"
#include "model/answer.hpp"
#include "verify/leakage.hpp"

namespace ivr {
namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& uri) {
  std::filesystem::path p(uri);
  return p.is_absolute() ? p : base / p;
}

std::vector<BBox> boxes_of(const Sample& s) {
  std::vector<BBox> boxes;
  if (!s.extra.contains("boxes")) return boxes;
  int index = 0;
  for (const auto& b : s.extra.at("boxes")) {
    boxes.push_back({b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>(),
                     b.value("label", index)});
    ++index;
  }
  return boxes;
}

}  // namespace

std::string_view to_string(RenderKind k) {
  switch (k) {
    case RenderKind::kBev: return "BEV";
    case RenderKind::kPov: return "POV";
    case RenderKind::kDepthOverlay: return "DepthOverlay";
    case RenderKind::kNoRender: return "NoRender";
  }
  return "NoRender";
}

RenderKind parse_render_kind(std::string_view s) {
  if (s == "BEV") return RenderKind::kBev;
  if (s == "POV") return RenderKind::kPov;
  if (s == "DepthOverlay") return RenderKind::kDepthOverlay;
  if (s == "NoRender") return RenderKind::kNoRender;
  fail(ErrorCode::kParse, "unknown render kind '" + std::string(s) + "'");
}

std::vector<int> select_keyframes_uniform(int n_frames, int budget) {
  if (n_frames < 1 || budget < 1) fail(ErrorCode::kInvalidArgument, "n_frames and budget must be >= 1");
  std::vector<int> out;
  if (budget >= n_frames) {
    for (int i = 0; i < n_frames; ++i) out.push_back(i);
    return out;
  }
  if (budget == 1) return {0};
  const long long span = n_frames - 1;
  const long long denom = budget - 1;
  for (long long i = 0; i < budget; ++i) {
    out.push_back(static_cast<int>((2 * i * span + denom) / (2 * denom)));
  }
  return out;
}

const Taxonomy& default_taxonomy() {
  static const Taxonomy table = {
      {"route_plan", RenderKind::kBev},
      {"route_planning", RenderKind::kBev},
      {"global_topology", RenderKind::kBev},
      {"navigation", RenderKind::kBev},
      {"perspective_shift", RenderKind::kPov},
      {"view_change", RenderKind::kPov},
      {"view_change_infer", RenderKind::kPov},
      {"spatial_imagination", RenderKind::kPov},
      {"spatial_imagination_oc", RenderKind::kPov},
      {"spatial_imagination_oo", RenderKind::kPov},
      {"camera_distance", RenderKind::kDepthOverlay},
      {"depth_oc", RenderKind::kDepthOverlay},
      {"distance_oc", RenderKind::kDepthOverlay},
      {"object_count", RenderKind::kNoRender},
      {"object_size", RenderKind::kNoRender},
      {"room_size", RenderKind::kNoRender},
      {"object_abs_distance", RenderKind::kNoRender},
      {"object_rel_distance", RenderKind::kNoRender},
      {"object_rel_direction", RenderKind::kNoRender},
      {"obj_appearance_order", RenderKind::kNoRender},
      {"depth_oo", RenderKind::kNoRender},
      {"distance_oo", RenderKind::kNoRender},
      {"distance_infer_oo", RenderKind::kNoRender},
      {"position_matching", RenderKind::kNoRender},
      {"camera_pose", RenderKind::kNoRender},
      {"object_relation_oc", RenderKind::kNoRender},
      {"object_relation_oo", RenderKind::kNoRender},
  };
  return table;
}

RenderKind classify_render_kind(const std::string& task_category, const Taxonomy& taxonomy) {
  auto it = taxonomy.find(task_category);
  if (it == taxonomy.end()) fail(ErrorCode::kUnknownCategory, "unknown task category '" + task_category + "'");
  return it->second;
}

std::vector<std::string> PromptSpec::texts() const {
  std::vector<std::string> t{instruction, marker_preservation_clause};
  if (target_viewpoint) t.push_back(*target_viewpoint);
  return t;
}

json to_json(const PromptSpec& p) {
  json j = {{"instruction", p.instruction},
            {"marker_preservation_clause", p.marker_preservation_clause},
            {"forbidden_strings", p.forbidden_strings}};
  j["target_viewpoint"] = p.target_viewpoint ? json(*p.target_viewpoint) : json(nullptr);
  return j;
}

PromptSpec prompt_from_json(const json& j) {
  PromptSpec p;
  p.instruction = j.at("instruction").get<std::string>();
  p.marker_preservation_clause = j.at("marker_preservation_clause").get<std::string>();
  p.forbidden_strings = j.at("forbidden_strings").get<std::vector<std::string>>();
  if (j.contains("target_viewpoint") && !j.at("target_viewpoint").is_null()) {
    p.target_viewpoint = j.at("target_viewpoint").get<std::string>();
  }
  return p;
}

PromptTemplates PromptTemplates::defaults() {
  return {
      "Using the keyframes, draw a clean top-down bird's-eye-view map of the scene. Place every object at its "
      "observed position with consistent relative spacing and orientation. Question context: {query}",
      "Using the keyframes, render the scene as seen from {viewpoint}. Keep object positions, sizes and "
      "occlusions geometrically consistent with the input views. Question context: {query}",
      "Preserve all original object markers and their labels exactly as they appear{markers}, and keep the "
      "spatial layout of the scene unchanged.",
      "Do not write answers, measurements or any other text into the image besides the original marker labels.",
  };
}

std::vector<std::string> forbidden_forms(const AnswerSpec& gold) {
  std::vector<std::string> out;
  std::string value;
  if (gold.kind == AnswerKind::kMultipleChoice) {
    value = gold.label;
    for (auto& c : value) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out.push_back(value);
  } else {
    value = format_number(gold.number);
    out.push_back(value);
    if (gold.number == std::floor(gold.number) && std::abs(gold.number) < 1e15) {
      out.push_back(value + ".0");
    }
    if (!gold.unit.empty()) out.push_back(value + " " + gold.unit);
  }
  out.push_back("answer is " + value);
  return out;
}

std::vector<std::string> scene_markers(const Sample& s) {
  std::vector<std::string> out;
  if (!s.extra.contains("markers")) return out;
  for (const auto& m : s.extra.at("markers")) {
    out.push_back(m.is_string() ? m.get<std::string>() : m.dump());
  }
  return out;
}

PromptSpec build_generation_prompt(const Sample& s, RenderKind kind, const PromptTemplates& templates) {
  if (kind != RenderKind::kBev && kind != RenderKind::kPov) {
    fail(ErrorCode::kInvalidArgument, "generation prompt requested for a non-generative render kind");
  }
  PromptSpec p;
  const auto markers = scene_markers(s);
  std::string marker_list;
  if (!markers.empty()) {
    marker_list = " (markers: ";
    for (std::size_t i = 0; i < markers.size(); ++i) marker_list += (i ? ", " : "") + markers[i];
    marker_list += ")";
  }
  p.marker_preservation_clause = replace_all(templates.marker_clause, "{markers}", marker_list);
  if (kind == RenderKind::kPov) {
    p.target_viewpoint = s.extra.contains("target_viewpoint") && s.extra.at("target_viewpoint").is_string()
                             ? s.extra.at("target_viewpoint").get<std::string>()
                             : std::string("the viewpoint described in the question");
  }
  std::string body = kind == RenderKind::kBev ? templates.bev : templates.pov;
  body = replace_all(body, "{viewpoint}", p.target_viewpoint.value_or(""));
  body = replace_all(body, "{markers}", marker_list);
  body = replace_all(body, "{query}", s.query);
  p.instruction = body + " " + p.marker_preservation_clause + " " + templates.no_text_clause;
  p.forbidden_strings = forbidden_forms(s.answer);

  const auto texts = p.texts();
  const auto lint = lint_zero_leakage(texts, s.answer);
  if (!lint.pass) {
    const auto& span = lint.spans.front();
    const auto& text = texts[span.text_index];
    fail(ErrorCode::kLeakageUnavoidable, "sample '" + s.id + "': prompt would expose the answer ('" +
                                             text.substr(span.begin, span.end - span.begin) + "')");
  }
  return p;
}

int bucket_resolution(int side, const ResolutionGrid& grid) {
  if (side < 1) fail(ErrorCode::kInvalidArgument, "resolution must be >= 1");
  if (grid.stride < 1 || grid.min > grid.max) fail(ErrorCode::kInvalidArgument, "invalid resolution grid");
  const int c = std::clamp(side, grid.min, grid.max);
  return grid.min + ((c - grid.min) / grid.stride) * grid.stride;
}

void RenderConfig::validate() const {
  if (keyframe_budget < 1) fail(ErrorCode::kConfig, "renderer.keyframe_budget must be >= 1");
  if (keyframe_strategy == KeyframeStrategy::kModelDriven && keyframe_backend.empty()) {
    fail(ErrorCode::kConfig, "renderer.keyframe_backend required for model-driven keyframes");
  }
}

std::string_view to_string(RenderStatus s) {
  switch (s) {
    case RenderStatus::kRendered: return "rendered";
    case RenderStatus::kNoRender: return "no_render";
    case RenderStatus::kNotRouted: return "not_routed";
    case RenderStatus::kLeakageUnavoidable: return "leakage_unavoidable";
    case RenderStatus::kFailed: return "render_failed";
  }
  return "render_failed";
}

RenderStatus parse_render_status(std::string_view s) {
  for (auto st : {RenderStatus::kRendered, RenderStatus::kNoRender, RenderStatus::kNotRouted,
                  RenderStatus::kLeakageUnavoidable, RenderStatus::kFailed}) {
    if (to_string(st) == s) return st;
  }
  fail(ErrorCode::kParse, "unknown render status '" + std::string(s) + "'");
}

json to_json(const RenderRecord& r) {
  json j = {{"status", to_string(r.status)}, {"kind", to_string(r.kind)}, {"keyframes", r.keyframes}};
  j["prompt"] = r.prompt ? to_json(*r.prompt) : json(nullptr);
  if (r.x_mid) {
    j["x_mid"] = {{"uri", r.x_mid->uri}, {"sha256", r.x_mid->sha256}, {"width", r.x_mid->width},
                  {"height", r.x_mid->height}};
  } else {
    j["x_mid"] = nullptr;
  }
  j["vit_bucket"] = r.vit_bucket ? json::array({r.vit_bucket->first, r.vit_bucket->second}) : json(nullptr);
  j["vae_bucket"] = r.vae_bucket ? json::array({r.vae_bucket->first, r.vae_bucket->second}) : json(nullptr);
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

RenderRecord render_from_json(const json& j) {
  RenderRecord r;
  r.status = parse_render_status(j.at("status").get<std::string>());
  r.kind = parse_render_kind(j.at("kind").get<std::string>());
  r.keyframes = j.value("keyframes", std::vector<int>{});
  if (j.contains("prompt") && !j.at("prompt").is_null()) r.prompt = prompt_from_json(j.at("prompt"));
  if (j.contains("x_mid") && !j.at("x_mid").is_null()) {
    const auto& x = j.at("x_mid");
    r.x_mid = GeneratedImage{x.at("uri").get<std::string>(), x.at("sha256").get<std::string>(),
                             x.at("width").get<int>(), x.at("height").get<int>()};
  }
  auto pair_of = [](const json& v) -> std::optional<std::pair<int, int>> {
    if (v.is_null()) return std::nullopt;
    return std::pair{v.at(0).get<int>(), v.at(1).get<int>()};
  };
  if (j.contains("vit_bucket")) r.vit_bucket = pair_of(j.at("vit_bucket"));
  if (j.contains("vae_bucket")) r.vae_bucket = pair_of(j.at("vae_bucket"));
  r.reason = j.value("reason", std::string{});
  return r;
}

json to_json(const RenderedSample& r) {
  json j = to_json(r.routed);
  j["render"] = to_json(r.render);
  return j;
}

RenderedSample rendered_from_json(const json& j) {
  RenderedSample r;
  json routed = j;
  routed.erase("render");
  r.routed = routed_from_json(routed);
  r.render = render_from_json(j.at("render"));
  return r;
}

BackendRequest generation_request(const Sample& s, RenderKind kind, const PromptSpec& prompt,
                                  const std::vector<std::string>& keyframe_uris, const std::string& generator,
                                  std::int64_t seed) {
  // forbidden_strings stay local: sending them would hand the answer to the generator.
  json payload = {{"task", "generate"},
                  {"sample_id", s.id},
                  {"render_kind", to_string(kind)},
                  {"instruction", prompt.instruction},
                  {"marker_preservation_clause", prompt.marker_preservation_clause},
                  {"keyframes", keyframe_uris}};
  payload["target_viewpoint"] = prompt.target_viewpoint ? json(*prompt.target_viewpoint) : json(nullptr);
  return {generator, OpKind::kGenerate, std::move(payload), seed};
}

BackendRequest keyframe_request(const Sample& s, int budget, const std::string& backend, std::int64_t seed) {
  json media = json::array();
  for (const auto& m : s.media) media.push_back(m.uri);
  json payload = {{"task", "keyframes"},
                  {"sample_id", s.id},
                  {"query", s.query},
                  {"n_frames", s.frame_count},
                  {"budget", budget},
                  {"media", std::move(media)}};
  return {backend, OpKind::kSynthesize, std::move(payload), seed};
}

std::vector<int> select_keyframes(const Sample& s, const RenderConfig& cfg, Gateway* gateway, std::int64_t seed) {
  std::vector<int> rgb;
  for (std::size_t i = 0; i < s.media.size(); ++i) {
    if (s.media[i].kind == MediaKind::kRgb) rgb.push_back(static_cast<int>(i));
  }
  if (rgb.empty()) return {};
  if (s.input_modality != InputModality::kVideoFrames) {
    if (static_cast<int>(rgb.size()) > cfg.keyframe_budget) rgb.resize(static_cast<std::size_t>(cfg.keyframe_budget));
    return rgb;
  }
  const int n = static_cast<int>(rgb.size());
  std::vector<int> picks;
  if (cfg.keyframe_strategy == KeyframeStrategy::kModelDriven && gateway) {
    auto resp = gateway->invoke(keyframe_request(s, cfg.keyframe_budget, cfg.keyframe_backend, seed));
    try {
      auto arr = json::parse(resp.body).get<std::vector<int>>();
      const bool valid = !arr.empty() && static_cast<int>(arr.size()) <= std::min(cfg.keyframe_budget, n) &&
                         std::is_sorted(arr.begin(), arr.end()) &&
                         std::adjacent_find(arr.begin(), arr.end()) == arr.end() && arr.front() >= 0 &&
                         arr.back() < n;
      if (valid) picks = std::move(arr);
    } catch (const json::exception&) {
    }
  }
  if (picks.empty()) picks = select_keyframes_uniform(n, cfg.keyframe_budget);
  std::vector<int> out;
  for (int p : picks) out.push_back(rgb[static_cast<std::size_t>(p)]);
  return out;
}

std::string image_file_name(const std::string& sample_id) {
  std::string safe;
  for (char c : sample_id) {
    safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  }
  return safe + "-" + hash64_hex(sample_id).substr(0, 8) + ".png";
}

namespace {

RenderRecord render_one(const RoutedSample& r, const RenderConfig& cfg, Gateway* gateway, const RenderPaths& paths,
                        std::int64_t seed) {
  RenderRecord rec;
  const Sample& s = r.sample;
  if (!r.decision) {
    rec.status = RenderStatus::kNotRouted;
    rec.reason = "routing_failed";
    return rec;
  }
  if (r.decision->path != RoutePath::kVisualPath) {
    rec.status = RenderStatus::kNotRouted;
    rec.reason = "TextPath";
    return rec;
  }
  try {
    rec.kind = classify_render_kind(s.task_category, cfg.taxonomy);
    if (rec.kind == RenderKind::kNoRender) {
      rec.status = RenderStatus::kNoRender;
      return rec;
    }
    std::string png;
    if (rec.kind == RenderKind::kDepthOverlay) {
      auto it = std::find_if(s.media.begin(), s.media.end(),
                             [](const MediaRef& m) { return m.kind == MediaKind::kDepthGrid; });
      if (it == s.media.end()) fail(ErrorCode::kInvalidArgument, "depth overlay needs a DepthGrid media ref");
      const auto depth = load_depth(resolve(paths.media_dir, it->uri));
      const auto boxes = boxes_of(s);
      png = encode_png(depth_to_pseudocolor(depth, boxes));
    } else {
      if (!gateway || cfg.generator.empty()) fail(ErrorCode::kConfig, "no image generator configured");
      rec.keyframes = select_keyframes(s, cfg, gateway, seed);
      try {
        rec.prompt = build_generation_prompt(s, rec.kind, cfg.templates);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kLeakageUnavoidable) throw;
        rec.status = RenderStatus::kLeakageUnavoidable;
        rec.reason = e.what();
        return rec;
      }
      std::vector<std::string> uris;
      for (int k : rec.keyframes) uris.push_back(s.media[static_cast<std::size_t>(k)].uri);
      auto resp = gateway->invoke(generation_request(s, rec.kind, *rec.prompt, uris, cfg.generator, seed));
      if (!resp.ok()) fail(ErrorCode::kMalformedResponse, "generator refused");
      png = std::move(resp.body);
    }
    const auto info = probe_png(png);
    const std::string rel = (std::filesystem::path(paths.image_subdir) / image_file_name(s.id)).generic_string();
    write_file(paths.output_dir / rel, png);
    rec.x_mid = GeneratedImage{rel, sha256_hex(png), info.width, info.height};
    rec.vit_bucket = std::pair{bucket_resolution(info.width, cfg.vit_grid), bucket_resolution(info.height, cfg.vit_grid)};
    rec.vae_bucket = std::pair{bucket_resolution(info.width, cfg.vae_grid), bucket_resolution(info.height, cfg.vae_grid)};
    rec.status = RenderStatus::kRendered;
  } catch (const Error& e) {
    rec.status = RenderStatus::kFailed;
    rec.x_mid.reset();
    rec.reason = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  return rec;
}

}  // namespace

std::vector<RenderedSample> render_corpus(const std::vector<RoutedSample>& routed, const RenderConfig& cfg,
                                          Gateway* gateway, const RenderPaths& paths, std::int64_t seed,
                                          std::size_t workers) {
  cfg.validate();
  std::vector<RenderedSample> out(routed.size());
  parallel_for(routed.size(), workers, [&](std::size_t i) {
    out[i].routed = routed[i];
    out[i].render = render_one(routed[i], cfg, gateway, paths, seed);
  });
  return out;
}

}  // namespace ivr
