// Copyright 2026 The NuExo Teleop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace nuexo::bus {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws ConfigError on malformed input.
  static Endpoint parse(const std::string& text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Reconnect delays: starts at `initial`, doubles per failure, capped at `cap`.
class Backoff {
 public:
  explicit Backoff(std::chrono::milliseconds initial = std::chrono::milliseconds(100),
                   std::chrono::milliseconds cap = std::chrono::milliseconds(2000))
      : initial_(initial), cap_(cap), next_(initial) {}

  std::chrono::milliseconds next();
  void reset() { next_ = initial_; }

 private:
  std::chrono::milliseconds initial_;
  std::chrono::milliseconds cap_;
  std::chrono::milliseconds next_;
};

/// Hand-off between a node's message pump and its tick loop. Droppable items
/// (state samples) are evicted oldest-first when the queue is full; items that
/// are not droppable (commands) are never evicted and may exceed capacity.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity = 64) : capacity_(capacity) {}

  void push(T item, bool droppable) {
    std::lock_guard lock(mutex_);
    if (items_.size() >= capacity_) {
      for (auto it = items_.begin(); it != items_.end(); ++it) {
        if (it->droppable) {
          items_.erase(it);
          ++dropped_;
          break;
        }
      }
    }
    items_.push_back({std::move(item), droppable});
  }

  std::vector<T> drain() {
    std::lock_guard lock(mutex_);
    std::vector<T> out;
    out.reserve(items_.size());
    for (auto& e : items_) out.push_back(std::move(e.item));
    items_.clear();
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  std::uint64_t dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
  }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Entry {
    T item;
    bool droppable;
  };
  mutable std::mutex mutex_;
  std::deque<Entry> items_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
};

/// Microsecond stamps from the process's monotonic clock, strictly increasing
/// across calls.
class MonotonicStamp {
 public:
  std::uint64_t now();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
  std::uint64_t last_ = 0;
  bool first_ = true;
};

}  // namespace nuexo::bus
