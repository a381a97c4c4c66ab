// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <numeric>

#include <unistd.h>

#include "common/error.hpp"
#include "gateway/gateway.hpp"
#include "model/sample.hpp"

namespace ivr::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ivr_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

inline Sample mc_sample(const std::string& id, const std::string& gold = "B",
                        const std::string& category = "route_plan", Corpus corpus = Corpus::kSpar) {
  Sample s;
  s.id = id;
  s.query = "Which way should the robot turn first?";
  s.media = {{"media/" + id + ".jpg", MediaKind::kRgb, 640, 480}};
  s.answer = AnswerSpec::multiple_choice({"A", "B", "C", "D"}, gold);
  s.corpus = corpus;
  s.task_category = category;
  return s;
}

inline Sample numeric_sample(const std::string& id, double gold, const std::string& category = "object_count",
                             Corpus corpus = Corpus::kVsi) {
  Sample s = mc_sample(id, "A", category, corpus);
  s.query = "How many chairs are there?";
  s.answer = AnswerSpec::numeric(gold, "m");
  return s;
}

/// Transport answering through a callback, counting calls and peak concurrency.
class MockTransport : public Transport {
 public:
  using Handler = std::function<BackendResponse(const BackendRequest&)>;
  explicit MockTransport(Handler h, std::chrono::milliseconds hold = std::chrono::milliseconds(0))
      : handler_(std::move(h)), hold_(hold) {}

  BackendResponse send(const BackendRequest& req) override {
    const int now = ++in_flight_;
    {
      std::lock_guard lock(mu_);
      peak_ = std::max(peak_, now);
      ++calls_;
    }
    if (hold_.count() > 0) std::this_thread::sleep_for(hold_);
    BackendResponse r;
    try {
      r = handler_(req);
    } catch (...) {
      --in_flight_;
      throw;
    }
    --in_flight_;
    return r;
  }
  int peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }
  int calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  Handler handler_;
  std::chrono::milliseconds hold_;
  std::atomic<int> in_flight_{0};
  mutable std::mutex mu_;
  int peak_ = 0;
  int calls_ = 0;
};

inline BackendResponse ok(std::string body) { return {ResponseStatus::kOk, std::move(body), false, 0}; }

/// Transport that must never be reached.
class FailingTransport : public Transport {
 public:
  BackendResponse send(const BackendRequest&) override {
    ++calls;
    throw std::runtime_error("network access in replay");
  }
  std::atomic<int> calls{0};
};

inline RetryPolicy fast_retry(int attempts = 3, int in_flight = 4) {
  RetryPolicy p;
  p.max_attempts = attempts;
  p.base_delay = std::chrono::milliseconds(0);
  p.max_in_flight = in_flight;
  return p;
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace ivr::test
