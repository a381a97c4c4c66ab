// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "engine/pipeline.hpp"

#include <cstdio>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "curation/balance.hpp"
#include "curation/composition.hpp"
#include "curation/review.hpp"

namespace ivr {
namespace {

fs::path dir_of(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

template <class T, class F>
std::vector<T> load_lines(const fs::path& path, F&& from_json) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(from_json(j));
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

template <class T>
void save_lines(const fs::path& path, const std::vector<T>& items) {
  std::vector<json> rows;
  rows.reserve(items.size());
  for (const auto& it : items) rows.push_back(to_json(it));
  write_jsonl(path, rows);
}

json file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

}  // namespace

std::string rebase_uri(const std::string& uri, const fs::path& from_dir, const fs::path& to_dir) {
  const fs::path abs = (fs::absolute(from_dir) / uri).lexically_normal();
  return abs.lexically_relative(fs::absolute(to_dir).lexically_normal()).generic_string();
}

json run_route(const EngineConfig& cfg, Gateway& gw, const fs::path& manifest, const fs::path& out) {
  auto samples = load_manifest(manifest);
  auto result = route_corpus(samples, cfg.router, gw, cfg.seed, cfg.worker_count());
  save_lines(out, result.samples);
  return {{"stage", "route"}, {"output", out.generic_string()}, {"routing", result.stats.to_json()}};
}

json run_render(const EngineConfig& cfg, Gateway& gw, const fs::path& routed, const fs::path& out,
                const fs::path& media_dir) {
  auto items = load_lines<RoutedSample>(routed, routed_from_json);
  RenderPaths paths{media_dir.empty() ? dir_of(routed) : media_dir, dir_of(out)};
  auto rendered = render_corpus(items, cfg.renderer, &gw, paths, cfg.seed, cfg.worker_count());
  // media URIs stay relative to the original manifest; record where they live
  save_lines(out, rendered);
  std::map<std::string, std::size_t> by_status;
  for (const auto& r : rendered) ++by_status[std::string(to_string(r.render.status))];
  return {{"stage", "render"}, {"output", out.generic_string()}, {"render_status", by_status}};
}

json run_verify(const EngineConfig& cfg, Gateway& gw, const fs::path& rendered, const fs::path& out) {
  auto items = load_lines<RenderedSample>(rendered, rendered_from_json);
  auto result = verify_corpus(items, cfg.verifier, gw, dir_of(rendered), cfg.seed, cfg.worker_count());
  for (auto& v : result.samples) {
    auto& x = v.rendered.render.x_mid;
    if (x) x->uri = rebase_uri(x->uri, dir_of(rendered), dir_of(out));
  }
  save_lines(out, result.samples);
  return {{"stage", "verify"}, {"output", out.generic_string()}, {"verification", result.stats.to_json()}};
}

json run_backfill(const EngineConfig& cfg, Gateway& gw, const fs::path& verified, const fs::path& out) {
  auto items = load_lines<VerifiedSample>(verified, verified_from_json);
  auto result = backfill_corpus(items, cfg.backfill, gw, cfg.seed, cfg.worker_count());
  for (auto& t : result.tuples) {
    if (t.tuple.vis) t.tuple.vis->uri = rebase_uri(t.tuple.vis->uri, dir_of(verified), dir_of(out));
  }
  save_lines(out, result.tuples);
  return {{"stage", "backfill"}, {"output", out.generic_string()}, {"backfill", result.stats.to_json()}};
}

json run_assemble(const EngineConfig& cfg, const fs::path& tuples, const fs::path& out, const AssembleOptions& opts) {
  auto lines = load_lines<TupleLine>(tuples, tuple_line_from_json);
  std::vector<std::size_t> inter, text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    (lines[i].mode == RecordMode::kInterleaved ? inter : text).push_back(i);
  }
  const auto sel = balance_mix(inter.size(), text.size(), cfg.balance.target_ratio, static_cast<std::uint64_t>(cfg.seed));
  std::vector<char> keep(lines.size(), 0);
  for (auto k : sel.interleaved) keep[inter[k]] = 1;
  for (auto k : sel.textual) keep[text[k]] = 1;

  std::vector<ReviewItem> items;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!keep[i]) continue;
    auto t = lines[i].tuple;
    if (t.vis) t.vis->uri = rebase_uri(t.vis->uri, dir_of(tuples), dir_of(out));
    check_tuple(t);
    ReviewItem it;
    it.sample_id = t.sample_id;
    it.row = dataset_row(assemble_record(t), lines[i].sample);
    it.verification = lines[i].verification ? to_json(*lines[i].verification) : json(nullptr);
    items.push_back(std::move(it));
  }

  if (!opts.queue_out.empty()) {
    std::vector<json> q;
    for (const auto& it : items) {
      json line = {{"sample_id", it.sample_id}, {"row", it.row}};
      if (!it.verification.is_null()) line["verification"] = it.verification;
      q.push_back(std::move(line));
    }
    write_jsonl(opts.queue_out, q);
  }

  ReviewLog log(items);
  std::size_t decisions = 0;
  if (!opts.decisions.empty()) {
    for (const auto& j : read_jsonl(opts.decisions)) {
      const auto d = review_decision_from_json(j);
      if (!log.item(d.sample_id)) continue;  // decisions for samples outside this selection
      log.apply_decision(d);
      ++decisions;
    }
  }
  const auto rows = log.export_rows();
  write_jsonl(out, rows);

  std::vector<CompositionEntry> entries;
  for (const auto& r : rows) entries.push_back(composition_entry_from_json(r));
  json summary = {{"stage", "assemble"},
                  {"output", out.generic_string()},
                  {"pools", {{"interleaved", inter.size()}, {"textual", text.size()}}},
                  {"selected", {{"interleaved", sel.counts.interleaved}, {"textual", sel.counts.textual}}},
                  {"decisions_applied", decisions},
                  {"exported", rows.size()}};
  if (!entries.empty()) summary["composition"] = composition_report(entries).to_json();
  return summary;
}

json run_stats(const fs::path& manifest) {
  const auto rows = read_jsonl(manifest);
  std::vector<CompositionEntry> entries;
  RoutingStats routing;
  StageStats stages;
  bool has_routing = false, has_verification = false;
  for (const auto& j : rows) {
    entries.push_back(composition_entry_from_json(j));
    if (j.contains("routing")) {
      has_routing = true;
      const auto r = routed_from_json(j);
      routing.add(r.sample.corpus, r.decision ? std::optional(r.decision->path) : std::nullopt);
    }
    if (j.contains("verification") && j.at("verification").is_object() && j.contains("render")) {
      has_verification = true;
      stages.add(j.value("corpus", std::string("OTHER")), trail_from_json(j.at("verification")));
    }
  }
  json out = {{"composition", composition_report(entries).to_json()}};
  if (has_routing) out["routing"] = routing.to_json();
  if (has_verification) out["verification"] = stages.to_json();
  return out;
}

std::string stats_text(const json& stats) {
  std::string out;
  char buf[96];
  const auto& comp = stats.at("composition");
  out += "total " + std::to_string(comp.at("total").get<std::size_t>()) + "\n";
  for (const auto& [axis, buckets] : comp.at("axes").items()) {
    out += axis + ":\n";
    for (const auto& [label, b] : buckets.items()) {
      std::snprintf(buf, sizeof buf, "  %-24s %8zu  %6.2f%%\n", label.c_str(), b.at("count").get<std::size_t>(),
                    b.at("percent").get<double>());
      out += buf;
    }
  }
  if (stats.contains("routing")) out += "routing: " + stats.at("routing").dump() + "\n";
  if (stats.contains("verification")) out += "verification: " + stats.at("verification").dump() + "\n";
  return out;
}

json run_eval(const EngineConfig& cfg, const EvalInputs& in, const fs::path& out, const std::string& format) {
  const auto report = evaluate_files(in, cfg.protocol);
  const json j = report_to_json(report);
  if (!out.empty()) {
    if (format == "markdown" || format == "md") {
      write_file(out, report_to_markdown(report));
    } else {
      write_file(out, j.dump(2) + "\n");
    }
  }
  return j;
}

json run_pipeline(const EngineConfig& cfg, Gateway& gw, const fs::path& manifest, const fs::path& out_dir,
                  const fs::path& media_dir) {
  fs::create_directories(out_dir);
  const auto routed = out_dir / "routed.jsonl";
  const auto rendered = out_dir / "rendered.jsonl";
  const auto verified = out_dir / "verified.jsonl";
  const auto tuples = out_dir / "tuples.jsonl";
  const auto dataset = out_dir / "dataset.jsonl";
  const auto queue = out_dir / "queue.jsonl";

  json stages = json::array();
  stages.push_back(run_route(cfg, gw, manifest, routed));
  stages.push_back(run_render(cfg, gw, routed, rendered, media_dir.empty() ? dir_of(manifest) : media_dir));
  stages.push_back(run_verify(cfg, gw, rendered, verified));
  stages.push_back(run_backfill(cfg, gw, verified, tuples));
  stages.push_back(run_assemble(cfg, tuples, dataset, {queue, {}}));

  json digests = json::object();
  for (const auto& p : {routed, rendered, verified, tuples, dataset, queue}) {
    digests[p.filename().string()] = file_digest(p);
  }
  std::vector<fs::path> images;
  if (fs::exists(out_dir / "xmid")) {
    for (const auto& e : fs::directory_iterator(out_dir / "xmid")) images.push_back(e.path());
  }
  std::sort(images.begin(), images.end());
  std::string all;
  for (const auto& p : images) all += p.filename().string() + ":" + sha256_hex(read_file(p)) + "\n";
  digests["xmid"] = sha256_hex(all);
  for (auto& s : stages) s.erase("output");
  return {{"stages", stages}, {"digests", digests}, {"images", images.size()}};
}

}  // namespace ivr
