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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nuexo/bus/config.hpp"
#include "nuexo/bus/controller.hpp"
#include "nuexo/bus/master_source.hpp"
#include "nuexo/follower/follower.hpp"

namespace nuexo::bus {

struct NodeOptions {
  SystemConfig system;
  std::string endpoint;  // host:port to listen on (controller) or connect to
  std::optional<double> duration;     // s; run until stopped when absent
  std::filesystem::path log_dir;      // no log when empty
  const std::atomic<bool>* stop = nullptr;
  /// Human-readable node events (connections, staleness, protocol errors).
  /// Called from both node threads.
  std::function<void(const std::string&)> on_event;
};

struct ControllerNodeOptions : NodeOptions {
  std::optional<std::uint16_t> console_port;  // 0 picks a free port
  std::filesystem::path console_dir;          // static assets for the console
  /// Called once the sockets are bound: (bus port, console port or 0).
  std::function<void(std::uint16_t, std::uint16_t)> on_listening;
};

struct MasterNodeOptions : NodeOptions {
  Trajectory trajectory;
  std::optional<std::filesystem::path> replay;  // log with exo-kinematics records
};

struct FollowerNodeOptions : NodeOptions {
  std::uint16_t id = 1;
  sim::FollowerModel model;
  std::uint64_t seed = 1;
};

struct NodeSummary {
  std::uint64_t ticks = 0;
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;  // state samples evicted from the inbound queue
  std::uint64_t connects = 0;
  std::uint64_t protocol_errors = 0;
  std::vector<StalenessEvent> events;
  std::optional<sim::FollowerState> follower_state;  // follower nodes only
};

/// Long-running nodes. Each owns one tick thread and one message-pump thread
/// and returns after `duration`, or once `*stop` becomes true, with its log
/// flushed and closed.
NodeSummary run_controller_node(const ControllerNodeOptions& options);
NodeSummary run_master_node(const MasterNodeOptions& options);
NodeSummary run_follower_node(const FollowerNodeOptions& options);

/// Resamples a low-rate master stream (the console) at the controller rate by
/// interpolating between the two newest samples over their arrival interval.
class MasterInterpolator {
 public:
  void push(const MasterState& sample, double t);
  bool empty() const { return !latest_; }
  double last_arrival() const { return latest_t_; }
  MasterState at(double t) const;

 private:
  std::optional<MasterState> previous_, latest_;
  double previous_t_ = 0.0, latest_t_ = 0.0;
};

}  // namespace nuexo::bus
