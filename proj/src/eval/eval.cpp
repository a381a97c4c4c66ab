// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/eval.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "common/error.hpp"
#include "model/answer.hpp"

namespace ivr {

std::vector<double> ProtocolConfig::thresholds() const {
  if (!mra_thresholds.empty()) return mra_thresholds;
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back((50 + 5 * k) / 100.0);
  return t;
}

void ProtocolConfig::validate() const {
  if (name != "vsi" && name != "spar") fail(ErrorCode::kConfig, "protocol must be vsi or spar");
  for (double t : mra_thresholds) {
    if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::kConfig, "MRA thresholds must lie in (0, 1)");
  }
  if (!(mra_epsilon >= 0.0 && mra_epsilon < 1e-3)) fail(ErrorCode::kConfig, "mra_epsilon must lie in [0, 1e-3)");
}

double mra(double pred, double gold, const ProtocolConfig& cfg) {
  if (!std::isfinite(gold)) fail(ErrorCode::kInvalidArgument, "gold must be finite");
  if (!std::isfinite(pred)) return 0.0;
  if (gold == 0.0) return pred == 0.0 ? 1.0 : 0.0;
  const double rel = std::abs(pred - gold) / std::abs(gold);
  const auto ths = cfg.thresholds();
  int hits = 0;
  for (double th : ths) hits += rel < (1.0 - th) - cfg.mra_epsilon;
  return static_cast<double>(hits) / static_cast<double>(ths.size());
}

McTally mc_accuracy(const std::map<std::string, std::string>& preds, const std::map<std::string, std::string>& golds) {
  McTally t;
  for (const auto& [id, gold] : golds) {
    ++t.total;
    auto p = preds.find(id);
    if (p == preds.end()) {
      t.missing.push_back(id);
      continue;
    }
    t.correct += p->second == gold;
  }
  t.accuracy = t.total ? static_cast<double>(t.correct) / static_cast<double>(t.total) : 0.0;
  return t;
}

TierMap spar_default_tiers() {
  return {{"Low", {"Depth-OC", "Depth-OO", "Dist-OC", "Dist-OO"}},
          {"Mid", {"PosMatch", "CamPose", "ViewChgI"}},
          {"High", {"DistI-OO", "ObjRel-OC", "ObjRel-OO", "SpImag-OC", "SpImag-OO"}}};
}

std::map<std::string, double> reduce_dimensions(const std::map<std::string, double>& scores,
                                                const std::map<std::string, std::string>& pairing) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& [name, score] : scores) {
    auto p = pairing.find(name);
    auto& slot = acc[p == pairing.end() ? name : p->second];
    slot.first += score;
    ++slot.second;
  }
  std::map<std::string, double> out;
  for (const auto& [name, v] : acc) out[name] = v.first / v.second;
  return out;
}

std::vector<std::pair<std::string, double>> tier_average(const std::map<std::string, double>& category_scores,
                                                         const TierMap& tiers) {
  std::map<std::string, std::string> owner;
  for (const auto& [tier, members] : tiers) {
    for (const auto& m : members) owner.emplace(m, tier);
  }
  for (const auto& [name, _] : category_scores) {
    if (!owner.count(name)) fail(ErrorCode::kUnassignedCategory, "category '" + name + "' has no tier");
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [tier, members] : tiers) {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : members) {
      auto f = category_scores.find(m);
      if (f == category_scores.end()) continue;
      sum += f->second;
      ++n;
    }
    if (n) out.emplace_back(tier, sum / n);
  }
  return out;
}

EvalReport build_report(const std::string& protocol, const std::map<std::string, double>& subtask_scores,
                        const std::map<std::string, std::string>& pairing, const TierMap& tiers) {
  if (subtask_scores.empty()) fail(ErrorCode::kEmpty, "EmptyReport: no scored category");
  EvalReport r;
  r.protocol = protocol;
  r.subtask_scores = subtask_scores;
  const auto reduced = reduce_dimensions(subtask_scores, pairing);
  if (!tiers.empty()) {
    r.tiers = tier_average(reduced, tiers);
    for (const auto& [tier, members] : tiers) {
      for (const auto& m : members) {
        auto f = reduced.find(m);
        if (f != reduced.end()) r.categories.push_back({m, tier, f->second});
      }
    }
  } else {
    for (const auto& [name, score] : reduced) r.categories.push_back({name, "", score});
  }
  double sum = 0.0;
  for (const auto& [_, s] : subtask_scores) sum += s;
  r.overall_per_subtask = sum / static_cast<double>(subtask_scores.size());
  sum = 0.0;
  for (const auto& c : r.categories) sum += c.score;
  r.overall_per_reduced_category = sum / static_cast<double>(r.categories.size());
  return r;
}

std::string format_score(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", std::abs(v));
  std::string s = buf;
  const auto dot = s.find('.');
  std::string whole = s.substr(0, dot);
  std::string frac = s.substr(dot + 1, 2);
  // half-up on the third decimal; trailing digits beyond 1e-9 are noise
  if (s[dot + 3] >= '5') {
    std::string digits = whole + frac;
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && digits[i] == '9') digits[i--] = '0';
    if (i < 0) {
      digits.insert(digits.begin(), '1');
    } else {
      ++digits[i];
    }
    whole = digits.substr(0, digits.size() - 2);
    frac = digits.substr(digits.size() - 2);
  }
  return (v < 0 && (whole != "0" || frac != "00") ? "-" : "") + whole + "." + frac;
}

json report_to_json(const EvalReport& r) {
  json cats = json::array();
  for (const auto& c : r.categories) cats.push_back({{"name", c.name}, {"tier", c.tier}, {"score", c.score}});
  json tiers = json::array();
  for (const auto& [t, s] : r.tiers) tiers.push_back({{"tier", t}, {"score", s}});
  return {{"protocol", r.protocol},
          {"subtask_scores", r.subtask_scores},
          {"categories", cats},
          {"tiers", tiers},
          {"overall", {{"per_subtask", r.overall_per_subtask}, {"per_reduced_category", r.overall_per_reduced_category}}},
          {"counts", {{"samples", r.samples}, {"missing", r.missing}, {"unparseable", r.unparseable}}},
          {"flags", r.flags}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.protocol = j.at("protocol").get<std::string>();
  r.subtask_scores = j.at("subtask_scores").get<std::map<std::string, double>>();
  for (const auto& c : j.at("categories")) {
    r.categories.push_back({c.at("name").get<std::string>(), c.at("tier").get<std::string>(), c.at("score").get<double>()});
  }
  for (const auto& t : j.at("tiers")) r.tiers.emplace_back(t.at("tier").get<std::string>(), t.at("score").get<double>());
  r.overall_per_subtask = j.at("overall").at("per_subtask").get<double>();
  r.overall_per_reduced_category = j.at("overall").at("per_reduced_category").get<double>();
  r.samples = j.at("counts").at("samples").get<std::size_t>();
  r.missing = j.at("counts").at("missing").get<std::size_t>();
  r.unparseable = j.at("counts").at("unparseable").get<std::size_t>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

std::string report_to_markdown(const EvalReport& r) {
  if (r.categories.empty()) fail(ErrorCode::kEmpty, "EmptyReport: no category to render");
  std::string md = "| Tier | Category | Score |\n|---|---|---:|\n";
  if (r.tiers.empty()) {
    for (const auto& c : r.categories) md += "| | " + c.name + " | " + format_score(c.score) + " |\n";
  } else {
    for (const auto& [tier, avg] : r.tiers) {
      md += "| **" + tier + "** | | **" + format_score(avg) + "** |\n";
      for (const auto& c : r.categories) {
        if (c.tier == tier) md += "| | " + c.name + " | " + format_score(c.score) + " |\n";
      }
    }
  }
  md += "\nOverall (mean of reduced categories): " + format_score(r.overall_per_reduced_category) + "\n";
  md += "Overall (mean of subtasks): " + format_score(r.overall_per_subtask) + "\n";
  if (r.missing) md += "Missing predictions: " + std::to_string(r.missing) + "\n";
  return md;
}

namespace {

TierMap tiers_from_json(const json& j) {
  TierMap t;
  if (j.is_object()) {
    // object order is not preserved by the parser; use the conventional order when it matches
    std::set<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.insert(k);
    for (const char* name : {"Low", "Mid", "High"}) {
      if (keys.erase(name)) t.emplace_back(name, j.at(name).get<std::vector<std::string>>());
    }
    for (const auto& k : keys) t.emplace_back(k, j.at(k).get<std::vector<std::string>>());
  } else {
    for (const auto& e : j) t.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::vector<std::string>>());
  }
  return t;
}

}  // namespace

EvalReport evaluate_files(const EvalInputs& in, const ProtocolConfig& cfg) {
  cfg.validate();
  TierMap tiers;
  std::map<std::string, std::string> pairing;
  if (!in.tiers.empty()) {
    json t = json::parse(read_file(in.tiers), nullptr, false);
    if (t.is_discarded()) fail(ErrorCode::kParse, "tiers file is not JSON: " + in.tiers.string());
    if (t.contains("tiers")) tiers = tiers_from_json(t.at("tiers"));
    if (t.contains("pairing")) pairing = t.at("pairing").get<std::map<std::string, std::string>>();
  } else if (cfg.name == "spar") {
    tiers = spar_default_tiers();
  }

  std::map<std::string, std::string> raw;
  for (const auto& p : read_jsonl(in.preds)) {
    const auto id = p.at("sample_id").get<std::string>();
    const json& a = p.contains("answer") ? p.at("answer") : p.at("raw");
    raw[id] = a.is_string() ? a.get<std::string>() : a.dump();
  }

  const auto gold = load_manifest(in.gold);
  std::map<std::string, std::pair<double, std::size_t>> acc;
  EvalReport partial;
  for (const auto& s : gold) {
    auto& slot = acc[s.task_category];
    ++slot.second;
    ++partial.samples;
    auto f = raw.find(s.id);
    if (f == raw.end()) {
      ++partial.missing;
      partial.flags.push_back("MissingPrediction: " + s.id);
      continue;
    }
    auto c = try_canonicalize(f->second, s.answer);
    if (!c) {
      ++partial.unparseable;
      continue;
    }
    if (s.answer.kind == AnswerKind::kMultipleChoice) {
      std::string g = s.answer.label;
      for (auto& ch : g) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      slot.first += c->label() == g ? 1.0 : 0.0;
    } else {
      slot.first += mra(c->number(), s.answer.number, cfg);
    }
  }
  std::map<std::string, double> scores;
  for (const auto& [cat, v] : acc) scores[cat] = 100.0 * v.first / static_cast<double>(v.second);
  EvalReport r = build_report(cfg.name, scores, pairing, tiers);
  r.samples = partial.samples;
  r.missing = partial.missing;
  r.unparseable = partial.unparseable;
  r.flags = std::move(partial.flags);
  return r;
}

}  // namespace ivr
