// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/jsonl.hpp"

namespace ivr {

enum class ReviewStatus { kPending, kApproved, kRejected };
std::string_view to_string(ReviewStatus s);
/// Accepts "pending"/"approved"/"rejected" in any case, plus "approve"/"reject".
ReviewStatus parse_review_status(std::string_view s);

struct ReviewItem {
  std::string sample_id;
  json row;           // dataset row (record plus sample facts)
  json verification;  // trail, null for textual items
  ReviewStatus status = ReviewStatus::kPending;
  std::int64_t revision = 0;  // revision of the latest applied decision

  std::string corpus() const;
  std::string task_category() const;
};

json to_json(const ReviewItem& it);
/// Queue line: {"sample_id", "row", "verification"?}. Status starts Pending.
ReviewItem review_item_from_json(const json& j);

struct ReviewDecision {
  std::string sample_id;
  ReviewStatus decision = ReviewStatus::kApproved;
  std::string reviewer;
  std::string reason;
  std::int64_t revision = 0;

  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

json to_json(const ReviewDecision& d);
ReviewDecision review_decision_from_json(const json& j);

struct ApplyResult {
  ReviewStatus status;
  std::int64_t revision;
  bool applied;  // false for a replayed duplicate
};

struct QueueQuery {
  std::optional<ReviewStatus> status;
  std::optional<std::string> corpus;
  std::optional<std::string> task_category;
  std::size_t offset = 0;
  std::size_t limit = 50;
};

/// Items plus their append-only decision log. Revisions per item must grow;
/// an identical (id, revision) replay is a no-op, a different decision under a
/// used or older revision is kConflict, an unknown id is kNotFound.
/// Writers are serialized; readers share the lock.
class ReviewLog {
 public:
  explicit ReviewLog(std::vector<ReviewItem> items);

  /// Loads a queue file and replays an existing decision log. When `log_path`
  /// is non-empty every applied decision is appended to it.
  static ReviewLog open(const std::filesystem::path& queue_path, const std::filesystem::path& log_path);

  ApplyResult apply_decision(const ReviewDecision& d);

  std::optional<ReviewItem> item(const std::string& id) const;
  json queue(const QueueQuery& q) const;
  json stats() const;
  std::vector<ReviewDecision> decisions() const;
  std::size_t log_size() const;

  /// Dataset rows of every item whose latest status is not Rejected, in queue order.
  std::vector<json> export_rows() const;

 private:
  ApplyResult apply_locked(const ReviewDecision& d, bool persist);

  mutable std::unique_ptr<std::shared_mutex> mu_;
  std::vector<ReviewItem> items_;
  std::map<std::string, std::size_t> index_;
  std::vector<ReviewDecision> log_;
  std::filesystem::path log_path_;
};

/// Export oracle: recompute the latest status of every item from a full log.
std::map<std::string, ReviewStatus> replay_statuses(const std::vector<ReviewItem>& items,
                                                    const std::vector<ReviewDecision>& log);

class ReviewServer {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    std::string bearer_token;  // empty disables auth
    std::filesystem::path static_dir;
  };

  ReviewServer(ReviewLog& log, Options opts);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Environment variable holding the review bearer token.
inline constexpr const char* kReviewTokenEnv = "IVR_REVIEW_TOKEN";

}  // namespace ivr
