// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/review.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>

#include "common/error.hpp"

namespace ivr {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

json summary(const ReviewItem& it) {
  return {{"sample_id", it.sample_id},
          {"status", to_string(it.status)},
          {"revision", it.revision},
          {"corpus", it.corpus()},
          {"task_category", it.task_category()},
          {"mode", it.row.value("mode", std::string())}};
}

}  // namespace

std::string_view to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kPending: return "Pending";
    case ReviewStatus::kApproved: return "Approved";
    case ReviewStatus::kRejected: return "Rejected";
  }
  return "Pending";
}

ReviewStatus parse_review_status(std::string_view s) {
  const auto l = lower(s);
  if (l == "pending") return ReviewStatus::kPending;
  if (l == "approved" || l == "approve") return ReviewStatus::kApproved;
  if (l == "rejected" || l == "reject") return ReviewStatus::kRejected;
  fail(ErrorCode::kInvalidArgument, "unknown review status '" + std::string(s) + "'");
}

std::string ReviewItem::corpus() const { return row.value("corpus", std::string()); }
std::string ReviewItem::task_category() const { return row.value("task_category", std::string()); }

json to_json(const ReviewItem& it) {
  return {{"sample_id", it.sample_id},
          {"row", it.row},
          {"verification", it.verification},
          {"status", to_string(it.status)},
          {"revision", it.revision}};
}

ReviewItem review_item_from_json(const json& j) {
  ReviewItem it;
  it.row = j.at("row");
  it.sample_id = j.contains("sample_id") ? j.at("sample_id").get<std::string>()
                                         : it.row.at("sample_id").get<std::string>();
  it.verification = j.value("verification", json());
  return it;
}

json to_json(const ReviewDecision& d) {
  return {{"sample_id", d.sample_id},
          {"decision", to_string(d.decision)},
          {"reviewer", d.reviewer},
          {"reason", d.reason},
          {"revision", d.revision}};
}

ReviewDecision review_decision_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "decision must be a JSON object");
  ReviewDecision d;
  try {
    d.sample_id = j.value("sample_id", std::string());
    d.decision = parse_review_status(j.at("decision").get<std::string>());
    d.reviewer = j.at("reviewer").get<std::string>();
    d.reason = j.value("reason", std::string());
    d.revision = j.at("revision").get<std::int64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed decision: ") + e.what());
  }
  if (d.decision == ReviewStatus::kPending) fail(ErrorCode::kInvalidArgument, "decision must be approve or reject");
  if (d.revision < 1) fail(ErrorCode::kInvalidArgument, "revision must be >= 1");
  if (d.reviewer.empty()) fail(ErrorCode::kInvalidArgument, "reviewer must be non-empty");
  return d;
}

ReviewLog::ReviewLog(std::vector<ReviewItem> items)
    : mu_(std::make_unique<std::shared_mutex>()), items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].sample_id, i).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate review item '" + items_[i].sample_id + "'");
    }
  }
}

ReviewLog ReviewLog::open(const std::filesystem::path& queue_path, const std::filesystem::path& log_path) {
  std::vector<ReviewItem> items;
  for (const auto& j : read_jsonl(queue_path)) items.push_back(review_item_from_json(j));
  ReviewLog log(std::move(items));
  if (!log_path.empty() && std::filesystem::exists(log_path)) {
    for (const auto& j : read_jsonl(log_path)) log.apply_locked(review_decision_from_json(j), false);
  }
  log.log_path_ = log_path;
  return log;
}

ApplyResult ReviewLog::apply_decision(const ReviewDecision& d) {
  std::unique_lock lock(*mu_);
  return apply_locked(d, true);
}

ApplyResult ReviewLog::apply_locked(const ReviewDecision& d, bool persist) {
  auto it = index_.find(d.sample_id);
  if (it == index_.end()) fail(ErrorCode::kNotFound, "no review item '" + d.sample_id + "'");
  ReviewItem& item = items_[it->second];
  for (const auto& prev : log_) {
    if (prev.sample_id != d.sample_id || prev.revision != d.revision) continue;
    if (prev == d) return {item.status, item.revision, false};
    fail(ErrorCode::kConflict, "revision " + std::to_string(d.revision) + " of '" + d.sample_id +
                                   "' already holds a different decision");
  }
  if (d.revision <= item.revision) {
    fail(ErrorCode::kConflict, "stale revision " + std::to_string(d.revision) + " for '" + d.sample_id +
                                   "' (current " + std::to_string(item.revision) + ")");
  }
  if (persist && !log_path_.empty()) {
    if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot append to " + log_path_.string());
    out << to_json(d).dump() << '\n';
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed for " + log_path_.string());
  }
  log_.push_back(d);
  item.status = d.decision;
  item.revision = d.revision;
  return {item.status, item.revision, true};
}

std::optional<ReviewItem> ReviewLog::item(const std::string& id) const {
  std::shared_lock lock(*mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return items_[it->second];
}

json ReviewLog::queue(const QueueQuery& q) const {
  std::shared_lock lock(*mu_);
  json page = json::array();
  std::size_t matched = 0;
  for (const auto& it : items_) {
    if (q.status && it.status != *q.status) continue;
    if (q.corpus && it.corpus() != *q.corpus) continue;
    if (q.task_category && it.task_category() != *q.task_category) continue;
    if (matched >= q.offset && page.size() < q.limit) page.push_back(summary(it));
    ++matched;
  }
  return {{"total", matched}, {"offset", q.offset}, {"limit", q.limit}, {"items", std::move(page)}};
}

json ReviewLog::stats() const {
  std::shared_lock lock(*mu_);
  std::map<std::string, std::size_t> by_status{{"Pending", 0}, {"Approved", 0}, {"Rejected", 0}};
  for (const auto& it : items_) ++by_status[std::string(to_string(it.status))];
  return {{"total", items_.size()}, {"by_status", by_status}, {"decisions", log_.size()}};
}

std::vector<ReviewDecision> ReviewLog::decisions() const {
  std::shared_lock lock(*mu_);
  return log_;
}

std::size_t ReviewLog::log_size() const {
  std::shared_lock lock(*mu_);
  return log_.size();
}

std::vector<json> ReviewLog::export_rows() const {
  std::shared_lock lock(*mu_);
  std::vector<json> rows;
  for (const auto& it : items_) {
    if (it.status != ReviewStatus::kRejected) rows.push_back(it.row);
  }
  return rows;
}

std::map<std::string, ReviewStatus> replay_statuses(const std::vector<ReviewItem>& items,
                                                    const std::vector<ReviewDecision>& log) {
  std::map<std::string, std::pair<std::int64_t, ReviewStatus>> latest;
  for (const auto& it : items) latest[it.sample_id] = {0, ReviewStatus::kPending};
  for (const auto& d : log) {
    auto f = latest.find(d.sample_id);
    if (f != latest.end() && d.revision > f->second.first) f->second = {d.revision, d.decision};
  }
  std::map<std::string, ReviewStatus> out;
  for (const auto& [id, v] : latest) out[id] = v.second;
  return out;
}

}  // namespace ivr
