// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "verify/leakage.hpp"

#include <cctype>
#include <regex>

#include "common/error.hpp"
#include "model/answer.hpp"

namespace ivr {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string regex_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::string_view(R"(\^$.|?*+()[]{})").find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

std::string_view rule_name(LeakageRule r) {
  switch (r) {
    case LeakageRule::kGoldString: return "gold_string";
    case LeakageRule::kNumeral: return "numeral";
    case LeakageRule::kAnswerIsLabel: return "answer_is_label";
  }
  return "gold_string";
}

LeakageRule parse_rule(std::string_view s) {
  for (auto r : {LeakageRule::kGoldString, LeakageRule::kNumeral, LeakageRule::kAnswerIsLabel}) {
    if (rule_name(r) == s) return r;
  }
  fail(ErrorCode::kParse, "unknown leakage rule '" + std::string(s) + "'");
}

}  // namespace

LeakageResult lint_zero_leakage(std::span<const std::string> texts, const AnswerSpec& gold) {
  LeakageResult result;
  // the label and, for multiple choice, the text of the gold option
  std::vector<std::string> gold_strs;
  if (gold.kind == AnswerKind::kMultipleChoice) {
    gold_strs.push_back(gold.label);
    for (const auto& o : gold.options) {
      if (o.label == gold.label && !o.text.empty()) gold_strs.push_back(o.text);
    }
  } else {
    gold_strs.push_back(format_number(gold.number));
  }

  std::optional<std::regex> answer_is;
  if (gold.kind == AnswerKind::kMultipleChoice && !gold.label.empty()) {
    answer_is.emplace(R"(answer\s+is\s*:?\s*\(?)" + regex_escape(gold.label) + R"(\b)", std::regex::icase);
  }

  for (std::size_t ti = 0; ti < texts.size(); ++ti) {
    const std::string& text = texts[ti];
    const std::string hay = lower(text);
    for (const auto& g : gold_strs) {
      if (g.size() < 2) continue;
      const std::string gold_lower = lower(g);
      for (std::size_t pos = hay.find(gold_lower); pos != std::string::npos; pos = hay.find(gold_lower, pos + 1)) {
        const std::size_t end = pos + gold_lower.size();
        const bool left_ok = pos == 0 || !is_alnum(hay[pos - 1]);
        const bool right_ok = end == hay.size() || !is_alnum(hay[end]);
        if (left_ok && right_ok) result.spans.push_back({ti, pos, end, LeakageRule::kGoldString});
      }
    }
    if (gold.kind == AnswerKind::kNumeric) {
      for (const auto& n : find_numerals(text)) {
        if (n.value == gold.number) result.spans.push_back({ti, n.offset, n.offset + n.length, LeakageRule::kNumeral});
      }
    }
    if (answer_is) {
      for (auto it = std::sregex_iterator(text.begin(), text.end(), *answer_is); it != std::sregex_iterator(); ++it) {
        const auto begin = static_cast<std::size_t>(it->position(0));
        result.spans.push_back({ti, begin, begin + static_cast<std::size_t>(it->length(0)), LeakageRule::kAnswerIsLabel});
      }
    }
  }
  result.pass = result.spans.empty();
  return result;
}

json to_json(const LeakageResult& r) {
  json spans = json::array();
  for (const auto& s : r.spans) {
    spans.push_back({{"text_index", s.text_index}, {"begin", s.begin}, {"end", s.end}, {"rule", rule_name(s.rule)}});
  }
  return {{"result", r.pass ? "pass" : "fail"}, {"spans", std::move(spans)}};
}

LeakageResult leakage_from_json(const json& j) {
  LeakageResult r;
  r.pass = j.at("result").get<std::string>() == "pass";
  for (const auto& s : j.at("spans")) {
    r.spans.push_back({s.at("text_index").get<std::size_t>(), s.at("begin").get<std::size_t>(),
                       s.at("end").get<std::size_t>(), parse_rule(s.at("rule").get<std::string>())});
  }
  return r;
}

}  // namespace ivr
