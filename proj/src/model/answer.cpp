// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/answer.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>

#include "common/error.hpp"

namespace ivr {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim_non_alnum(std::string_view s) {
  while (!s.empty() && !is_alnum(s.front())) s.remove_prefix(1);
  while (!s.empty() && !is_alnum(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<std::string> match_label(std::string_view candidate, const AnswerSpec& spec) {
  const std::string u = upper(candidate);
  for (const auto& o : spec.options) {
    if (upper(o.label) == u) return upper(o.label);
  }
  return std::nullopt;
}

CanonicalAnswer canonicalize_mc(std::string_view raw, const AnswerSpec& spec) {
  const std::string_view cleaned = trim_non_alnum(raw);
  if (auto l = match_label(cleaned, spec)) return {*l};

  static const std::regex kAnswerIs(R"((?:answer|option)\s*(?:is|:)?\s*[:\-]?\s*\(?([A-Za-z0-9]+)\)?)",
                                    std::regex::icase);
  std::optional<std::string> last;
  const std::string text(raw);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kAnswerIs); it != std::sregex_iterator(); ++it) {
    if (auto l = match_label((*it)[1].str(), spec)) last = l;
  }
  if (last) return {*last};

  static const std::regex kLeading(R"(^\s*\(?([A-Za-z0-9]+)[.):]\s)");
  std::smatch m;
  if (std::regex_search(text, m, kLeading)) {
    if (auto l = match_label(m[1].str(), spec)) return {*l};
  }

  const std::string cleaned_upper = upper(cleaned);
  for (const auto& o : spec.options) {
    if (!o.text.empty() && upper(trim_non_alnum(o.text)) == cleaned_upper) return {upper(o.label)};
  }
  fail(ErrorCode::kUnparseable, "no option label in '" + text + "'");
}

CanonicalAnswer canonicalize_numeric(std::string_view raw) {
  const auto nums = find_numerals(raw);
  if (nums.empty()) fail(ErrorCode::kUnparseable, "no numeral in '" + std::string(raw) + "'");
  if (nums.size() == 1) return {nums.front().value};

  // Several numerals: only accept the one following the last "answer".
  std::string lower(raw);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto pos = lower.rfind("answer");
  if (pos != std::string::npos) {
    for (const auto& n : nums) {
      if (n.offset > pos) return {n.value};
    }
  }
  fail(ErrorCode::kUnparseable, "ambiguous numerals in '" + std::string(raw) + "'");
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CanonicalAnswer::to_string() const {
  return is_label() ? label() : format_number(number());
}

std::vector<NumeralMatch> find_numerals(std::string_view text) {
  std::vector<NumeralMatch> out;
  const std::size_t n = text.size();
  auto word_char = [](char c) { return is_alnum(c) || c == '_'; };
  std::size_t i = 0;
  while (i < n) {
    if (!word_char(text[i])) {
      ++i;
      continue;
    }
    const bool glued = i > 0 && (word_char(text[i - 1]) || text[i - 1] == '.');
    if (!is_digit(text[i]) || glued) {
      // skip the rest of an alphanumeric token ("B12")
      while (i < n && word_char(text[i])) ++i;
      continue;
    }
    std::size_t start = i;
    bool neg = false;
    if (i > 0 && text[i - 1] == '-' && (i < 2 || !word_char(text[i - 2]))) {
      neg = true;
      start = i - 1;
    }
    std::string digits;
    std::size_t run = 0;
    while (i < n && is_digit(text[i])) {
      digits += text[i++];
      ++run;
    }
    if (run <= 3) {  // thousands separators: 1,234,567
      while (i + 3 < n && text[i] == ',' && is_digit(text[i + 1]) && is_digit(text[i + 2]) &&
             is_digit(text[i + 3]) && (i + 4 >= n || !is_digit(text[i + 4]))) {
        digits.append(text.substr(i + 1, 3));
        i += 4;
      }
    }
    if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
      digits += '.';
      ++i;
      while (i < n && is_digit(text[i])) digits += text[i++];
    }
    double v = 0.0;
    std::from_chars(digits.data(), digits.data() + digits.size(), v);
    out.push_back({start, i - start, neg ? -v : v});
    while (i < n && word_char(text[i])) ++i;  // unit suffix such as "4m"
  }
  return out;
}

CanonicalAnswer canonicalize_answer(std::string_view raw, const AnswerSpec& spec) {
  if (raw.find_first_not_of(" \t\r\n") == std::string_view::npos) fail(ErrorCode::kUnparseable, "empty answer");
  if (spec.kind == AnswerKind::kMultipleChoice) return canonicalize_mc(raw, spec);
  auto c = canonicalize_numeric(raw);
  if (!std::isfinite(c.number())) fail(ErrorCode::kUnparseable, "non-finite numeral");
  return c;
}

std::optional<CanonicalAnswer> try_canonicalize(std::string_view raw, const AnswerSpec& spec) {
  try {
    return canonicalize_answer(raw, spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnparseable) return std::nullopt;
    throw;
  }
}

}  // namespace ivr
