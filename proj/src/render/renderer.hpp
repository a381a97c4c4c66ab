// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gateway/gateway.hpp"
#include "model/sample.hpp"
#include "render/depth.hpp"
#include "router/router.hpp"

namespace ivr {

enum class RenderKind { kBev, kPov, kDepthOverlay, kNoRender };
enum class KeyframeStrategy { kUniform, kModelDriven };

std::string_view to_string(RenderKind k);
RenderKind parse_render_kind(std::string_view s);

/// Strictly increasing frame indices, min(budget, n_frames) of them.
/// Uniform picks round(i * (n - 1) / (budget - 1)), half-up.
std::vector<int> select_keyframes_uniform(int n_frames, int budget);

using Taxonomy = std::map<std::string, RenderKind>;

/// Category table covering the SPAR and VSI task families. Route planning and
/// global topology map to BEV, egocentric perspective shifts to POV,
/// camera-centric distance and depth to DepthOverlay, the rest to NoRender.
const Taxonomy& default_taxonomy();

/// Throws kUnknownCategory when the category is absent from the table.
RenderKind classify_render_kind(const std::string& task_category, const Taxonomy& taxonomy);

struct PromptSpec {
  std::string instruction;
  std::string marker_preservation_clause;
  std::vector<std::string> forbidden_strings;
  std::optional<std::string> target_viewpoint;

  /// All text that reaches the generator.
  std::vector<std::string> texts() const;
};

json to_json(const PromptSpec& p);
PromptSpec prompt_from_json(const json& j);

struct PromptTemplates {
  // Placeholders: {query}, {markers}, {viewpoint}.
  std::string bev;
  std::string pov;
  std::string marker_clause;
  std::string no_text_clause;

  static PromptTemplates defaults();
};

/// Gold answer in every surface form a prompt must avoid.
std::vector<std::string> forbidden_forms(const AnswerSpec& gold);

/// Scene marker labels carried by the sample ("markers" manifest field).
std::vector<std::string> scene_markers(const Sample& s);

/// Builds the BEV/POV generation prompt and lints it. Throws
/// kLeakageUnavoidable when the expanded prompt cannot avoid the gold answer
/// (typically because it is itself a scene marker).
PromptSpec build_generation_prompt(const Sample& s, RenderKind kind, const PromptTemplates& templates = PromptTemplates::defaults());

struct ResolutionGrid {
  int min = 0;
  int max = 0;
  int stride = 1;
};

inline constexpr ResolutionGrid kVitGrid{224, 518, 14};
inline constexpr ResolutionGrid kVaeGrid{256, 512, 16};

/// Clamp to [min, max], then floor onto the min + k * stride lattice.
int bucket_resolution(int side, const ResolutionGrid& grid);

struct RenderConfig {
  int keyframe_budget = 8;
  KeyframeStrategy keyframe_strategy = KeyframeStrategy::kUniform;
  std::string keyframe_backend;  // required for kModelDriven
  std::string generator;
  Taxonomy taxonomy = default_taxonomy();
  PromptTemplates templates = PromptTemplates::defaults();
  ResolutionGrid vit_grid = kVitGrid;
  ResolutionGrid vae_grid = kVaeGrid;

  void validate() const;
};

enum class RenderStatus { kRendered, kNoRender, kNotRouted, kLeakageUnavoidable, kFailed };
std::string_view to_string(RenderStatus s);
RenderStatus parse_render_status(std::string_view s);

struct GeneratedImage {
  std::string uri;  // relative to the rendered manifest's directory
  std::string sha256;
  int width = 0;
  int height = 0;
};

struct RenderRecord {
  RenderStatus status = RenderStatus::kNotRouted;
  RenderKind kind = RenderKind::kNoRender;
  std::vector<int> keyframes;
  std::optional<PromptSpec> prompt;
  std::optional<GeneratedImage> x_mid;
  std::optional<std::pair<int, int>> vit_bucket;
  std::optional<std::pair<int, int>> vae_bucket;
  std::string reason;
};

json to_json(const RenderRecord& r);
RenderRecord render_from_json(const json& j);

struct RenderedSample {
  RoutedSample routed;
  RenderRecord render;
};

json to_json(const RenderedSample& r);
RenderedSample rendered_from_json(const json& j);

struct RenderPaths {
  std::filesystem::path media_dir;   // resolves relative media URIs
  std::filesystem::path output_dir;  // directory of the rendered manifest
  std::string image_subdir = "xmid";
};

BackendRequest generation_request(const Sample& s, RenderKind kind, const PromptSpec& prompt,
                                  const std::vector<std::string>& keyframe_uris, const std::string& generator,
                                  std::int64_t seed);

BackendRequest keyframe_request(const Sample& s, int budget, const std::string& backend, std::int64_t seed);

/// Keyframe indices for a sample; ModelDriven asks the backend and falls back
/// to Uniform when the reply is not a valid index list.
std::vector<int> select_keyframes(const Sample& s, const RenderConfig& cfg, Gateway* gateway, std::int64_t seed);

/// Produces x_mid for every VisualPath sample whose category triggers a render.
std::vector<RenderedSample> render_corpus(const std::vector<RoutedSample>& routed, const RenderConfig& cfg,
                                          Gateway* gateway, const RenderPaths& paths, std::int64_t seed,
                                          std::size_t workers);

std::string image_file_name(const std::string& sample_id);

}  // namespace ivr
