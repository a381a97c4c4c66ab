// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "sim/sim.hpp"

#include <cmath>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "model/answer.hpp"
#include "render/image.hpp"

namespace ivr {
namespace {

double draw(const std::string& backend, const std::string& salt, const json& payload, std::int64_t seed) {
  const std::string key = backend + "|" + salt + "|" + payload.value("sample_id", std::string()) + "|" +
                          std::to_string(payload.value("run", 0)) + "|" + std::to_string(seed);
  return unit_from_hash(hash64(key));
}

double rate_for(const json& sim, const char* key, Corpus c, double fallback) {
  if (!sim.contains(key)) return fallback;
  const json& r = sim.at(key);
  if (r.is_number()) return r.get<double>();
  return r.value(std::string(to_string(c)), fallback);
}

std::string gold_text(const AnswerSpec& a) {
  return a.kind == AnswerKind::kMultipleChoice ? a.label : format_number(a.number);
}

std::string wrong_text(const AnswerSpec& a) {
  if (a.kind == AnswerKind::kMultipleChoice) {
    for (std::size_t i = 0; i < a.options.size(); ++i) {
      if (a.options[i].label == a.label) return a.options[(i + 1) % a.options.size()].label;
    }
    return a.label == "A" ? "B" : "A";
  }
  const double w = a.number == 0.0 ? 5.0 : a.number * 1.75;
  return format_number(w);
}

BackendResponse ok(std::string body, bool binary = false) {
  return {ResponseStatus::kOk, std::move(body), binary, 0};
}

BackendResponse refused() { return {ResponseStatus::kRefused, "declined", false, 0}; }

std::string synth_png(const std::string& sample_id, std::int64_t seed, const std::string& kind) {
  const auto h = hash64(kind + "|" + sample_id + "|" + std::to_string(seed));
  RgbImage img;
  img.width = 48 + static_cast<int>(h % 48);
  img.height = 40 + static_cast<int>((h >> 8) % 40);
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  const auto r0 = static_cast<std::uint8_t>(h >> 16), g0 = static_cast<std::uint8_t>(h >> 24),
             b0 = static_cast<std::uint8_t>(h >> 32);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const bool cell = ((x / 8) + (y / 8)) % 2 == 0;
      img.pixels[static_cast<std::size_t>(y) * img.width + x] =
          cell ? Rgb{r0, g0, b0} : Rgb{static_cast<std::uint8_t>(255 - r0), static_cast<std::uint8_t>(x * 4),
                                       static_cast<std::uint8_t>(y * 4)};
    }
  }
  return encode_png(img);
}

}  // namespace

double default_factuality_fail(Corpus c) {
  switch (c) {
    case Corpus::kSpar: return 0.373;
    case Corpus::kVsi: return 0.351;
    case Corpus::kVlm3r: return 0.527;
    default: return 0.35;
  }
}

double default_blind_fail(Corpus c) {
  switch (c) {
    case Corpus::kSpar: return 0.246;
    case Corpus::kVsi: return 0.216;
    case Corpus::kVlm3r: return 0.640;
    default: return 0.25;
  }
}

double sim_difficulty(const std::string& sample_id) { return unit_from_hash(hash64("difficulty|" + sample_id)); }

SimTransport::SimTransport(std::map<std::string, BackendEndpoint> endpoints, std::filesystem::path base_dir)
    : endpoints_(std::move(endpoints)), base_dir_(std::move(base_dir)) {}

const Sample* SimTransport::world_sample(const BackendEndpoint& ep, const std::string& id) {
  const std::string world = ep.sim.value("world", std::string());
  if (world.empty()) return nullptr;
  std::lock_guard lock(mu_);
  auto it = worlds_.find(world);
  if (it == worlds_.end()) {
    std::filesystem::path p = world;
    if (p.is_relative()) p = base_dir_ / p;
    std::map<std::string, Sample> samples;
    for (auto& s : load_manifest(p)) samples.emplace(s.id, std::move(s));
    it = worlds_.emplace(world, std::move(samples)).first;
  }
  auto f = it->second.find(id);
  return f == it->second.end() ? nullptr : &f->second;
}

BackendResponse SimTransport::send(const BackendRequest& req) {
  auto eit = endpoints_.find(req.backend_id);
  if (eit == endpoints_.end()) fail(ErrorCode::kConfig, "sim has no backend '" + req.backend_id + "'");
  const BackendEndpoint& ep = eit->second;
  const json& sim = ep.sim;
  const json& p = req.payload;
  const std::string task = p.value("task", std::string());
  const std::string id = p.value("sample_id", std::string());

  if (sim.value("flaky_rate", 0.0) > draw(ep.id, "flaky|" + task, p, req.seed)) {
    std::lock_guard lock(mu_);
    if (flaked_.insert(canonical_hash(req)).second) return {ResponseStatus::kTransportError, "", false, 0};
  }
  if (sim.value("refusal_rate", 0.0) > draw(ep.id, "refuse|" + task, p, req.seed)) return refused();

  if (task == "keyframes") {
    const int n = p.value("n_frames", 0);
    const int budget = p.value("budget", 1);
    json picks = json::array();
    if (n <= budget) {
      for (int i = 0; i < n; ++i) picks.push_back(i);
    } else {
      // prefer the later half of each uniform stride
      for (int i = 0; i < budget; ++i) picks.push_back(std::min(n - 1, (2 * i + 1) * n / (2 * budget)));
    }
    return ok(picks.dump());
  }
  if (task == "generate") {
    return ok(synth_png(id, req.seed, p.value("render_kind", std::string())), true);
  }

  const Sample* s = world_sample(ep, id);
  if (!s) return refused();
  const double u = draw(ep.id, task, p, req.seed);

  if (task == "answer") {
    const double skill = sim.value("skill", 1.0);
    const bool correct = u < skill * (1.0 - sim_difficulty(id));
    const std::string a = correct ? gold_text(s->answer) : wrong_text(s->answer);
    return ok(s->answer.kind == AnswerKind::kMultipleChoice ? "The answer is " + a + "." : a + " meters");
  }
  if (task == "factuality") {
    const bool bad = u < rate_for(sim, "factuality_fail", s->corpus, default_factuality_fail(s->corpus));
    json reply = {{"verdict", bad ? "fail" : "pass"},
                  {"reason", bad ? "geometry contradicts the observation" : "consistent with the scene"}};
    return ok(reply.dump());
  }
  if (task == "blind_test") {
    const bool miss = u < rate_for(sim, "blind_fail", s->corpus, default_blind_fail(s->corpus));
    const std::string a = miss ? wrong_text(s->answer) : gold_text(s->answer);
    return ok(s->answer.kind == AnswerKind::kMultipleChoice ? a : a + " m");
  }
  if (task == "textual_chain" || task == "interleaved_chain") {
    const bool wrong = u < sim.value("inconsistency_rate", 0.0);
    const bool empty = !wrong && draw(ep.id, "empty|" + task, p, req.seed) < sim.value("empty_plan_rate", 0.0);
    const std::string a = wrong ? wrong_text(s->answer) : gold_text(s->answer);
    std::string plan = empty ? "" : "Identify the objects named in the question and the relation being asked.";
    if (!empty && task == "interleaved_chain") plan += " Sketch the scene to anchor their layout.";
    json reply = {{"plan", plan},
                  {"deduct", "Comparing the positions step by step, so the answer is " + a + "."},
                  {"answer", a}};
    return ok(reply.dump());
  }
  return refused();
}

}  // namespace ivr
