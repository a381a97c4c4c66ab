// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "model/sample.hpp"

namespace ivr {

/// A normalized answer: an uppercase option label or a finite real.
struct CanonicalAnswer {
  std::variant<std::string, double> value;

  bool is_label() const { return std::holds_alternative<std::string>(value); }
  const std::string& label() const { return std::get<std::string>(value); }
  double number() const { return std::get<double>(value); }
  std::string to_string() const;

  friend bool operator==(const CanonicalAnswer&, const CanonicalAnswer&) = default;
};

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Normalizes a free-form model answer against the expected answer kind.
/// Multiple choice accepts a bare label ("b.", "(B)"), "answer is B", a leading
/// "B." prefix, or the exact option text. Numeric accepts digit forms with unit
/// words stripped; number words are rejected. Throws kUnparseable.
CanonicalAnswer canonicalize_answer(std::string_view raw, const AnswerSpec& spec);

std::optional<CanonicalAnswer> try_canonicalize(std::string_view raw, const AnswerSpec& spec);

/// Every standalone decimal numeral in text, as (offset, length, value).
struct NumeralMatch {
  std::size_t offset;
  std::size_t length;
  double value;
};
std::vector<NumeralMatch> find_numerals(std::string_view text);

}  // namespace ivr
