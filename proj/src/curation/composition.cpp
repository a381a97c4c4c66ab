// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/composition.hpp"

#include <cstdio>

#include "common/error.hpp"

namespace ivr {

CompositionEntry composition_entry_from_json(const json& j) {
  const json& src = j.contains("sample") && j.at("sample").is_object() ? j.at("sample") : j;
  CompositionEntry e;
  if (j.contains("mode") && j.at("mode").is_string()) {
    e.mode = j.at("mode").get<std::string>();
  } else if (src.contains("mode") && src.at("mode").is_string()) {
    e.mode = src.at("mode").get<std::string>();
  } else if (j.contains("routing") && j.at("routing").value("status", "") == "ok") {
    e.mode = j.at("routing").value("path", "") == "VisualPath" ? "Interleaved" : "Textual";
  } else {
    e.mode = "Unknown";
  }
  e.corpus = src.value("corpus", std::string("OTHER"));
  e.task_category = src.value("task_category", std::string("unknown"));
  e.input_modality = src.value("input_modality", std::string("unknown"));
  return e;
}

std::string source_group(std::string_view corpus) {
  if (corpus == "SPAR") return "SPAR";
  if (corpus == "VSI" || corpus == "VLM3R") return "VSI+VLM3R";
  return std::string(corpus);
}

double percent_half_up(std::size_t count, std::size_t total) {
  if (total == 0) return 0.0;
  // hundredths of a percent = round(count * 10000 / total), half-up
  const unsigned long long num = 2ULL * count * 10000ULL + total;
  const unsigned long long q = num / (2ULL * total);
  return static_cast<double>(q) / 100.0;
}

CompositionReport composition_report(std::span<const CompositionEntry> entries) {
  if (entries.empty()) fail(ErrorCode::kEmpty, "EmptyManifest: composition of an empty manifest");
  CompositionReport r;
  r.total = entries.size();
  for (const auto& e : entries) {
    ++r.axes["mode"][e.mode].count;
    ++r.axes["source"][source_group(e.corpus)].count;
    ++r.axes["corpus"][e.corpus].count;
    ++r.axes["task_category"][e.task_category].count;
    ++r.axes["input_modality"][e.input_modality].count;
  }
  for (auto& [axis, buckets] : r.axes) {
    for (auto& [label, b] : buckets) b.percent = percent_half_up(b.count, r.total);
  }
  return r;
}

json CompositionReport::to_json() const {
  json axes_json = json::object();
  for (const auto& [axis, buckets] : axes) {
    json a = json::object();
    for (const auto& [label, b] : buckets) a[label] = {{"count", b.count}, {"percent", b.percent}};
    axes_json[axis] = std::move(a);
  }
  return {{"total", total}, {"axes", std::move(axes_json)}};
}

std::string CompositionReport::to_text() const {
  std::string out = "total " + std::to_string(total) + "\n";
  char buf[64];
  for (const auto& [axis, buckets] : axes) {
    out += axis + ":\n";
    for (const auto& [label, b] : buckets) {
      std::snprintf(buf, sizeof buf, "%.2f%%", b.percent);
      out += "  " + label + "  " + std::to_string(b.count) + "  " + buf + "\n";
    }
  }
  return out;
}

}  // namespace ivr
