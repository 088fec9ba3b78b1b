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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "nuexo/bus/config.hpp"
#include "nuexo/bus/controller.hpp"
#include "nuexo/bus/master_source.hpp"
#include "nuexo/bus/payloads.hpp"
#include "nuexo/datalog/datalog.hpp"
#include "nuexo/datalog/odometry.hpp"
#include "nuexo/follower/follower.hpp"

namespace nuexo::bus {

/// Follower node: the simulator behind a low-level driver shim. The shim adds
/// the platform's gravity compensation to incoming commands and falls back to
/// zero torque when commands stop arriving.
class SimulatedFollower {
 public:
  SimulatedFollower(std::uint16_t id, sim::FollowerModel model, std::uint64_t seed,
                    std::uint64_t hold_ticks = 5);

  std::uint16_t id() const { return id_; }
  const sim::FollowerModel& model() const { return model_; }
  const sim::FollowerState& state() const { return state_; }

  FollowerReport report();
  void command(const std::vector<double>& torque, std::uint64_t tick);
  /// Advances one control period in 1 ms substeps.
  void advance(double period, std::uint64_t tick);

 private:
  std::uint16_t id_;
  sim::FollowerModel model_;
  sim::FollowerState state_;
  std::mt19937_64 rng_;
  Eigen::VectorXd command_;
  std::optional<std::uint64_t> command_tick_;
  std::uint64_t hold_ticks_;
};

/// Synthetic IMU of a seated operator: gravity plus small white noise.
class SyntheticImu {
 public:
  explicit SyntheticImu(std::uint64_t seed) : rng_(seed) {}
  log::ImuSample sample();

 private:
  std::mt19937_64 rng_;
};

/// Opens a writer registering the six standard streams (or a subset).
std::unique_ptr<log::LogWriter> open_session_log(const std::filesystem::path& path,
                                                 const std::vector<std::uint16_t>& streams);

struct LoopbackOptions {
  SystemConfig system;
  std::vector<std::pair<std::uint16_t, sim::FollowerModel>> followers;
  Trajectory trajectory;
  double duration = 10.0;  // s
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> log_path;          // all six streams
  std::optional<std::filesystem::path> command_log_path;  // teleop commands only
  /// Test hook: return true to drop a follower's state message on a tick.
  std::function<bool(std::uint16_t id, std::uint64_t tick)> follower_silent;
};

struct FollowerTrace {
  std::uint16_t id = 0;
  /// Angle between the unfiltered master shoulder pose and the follower's,
  /// sampled after each control period.
  std::vector<double> shoulder_error;
  /// Concatenated TorqueCmd payload bytes as received by this follower.
  std::vector<std::uint8_t> command_bytes;
  std::size_t commands = 0;
  sim::FollowerState final_state;
};

struct LoopbackResult {
  std::uint64_t ticks = 0;
  std::vector<double> times;  // s, end of each control period
  std::vector<FollowerTrace> followers;
  std::vector<StalenessEvent> events;
};

/// Runs master, controller and followers in one thread, passing every
/// message through the wire codec. Identical options give identical results
/// and identical log bytes.
LoopbackResult run_loopback(const LoopbackOptions& options);

/// Feeds a recorded session's master and follower states back through a
/// fresh controller, one tick per timestamp, and writes its commands to
/// `command_log`. Returns the number of commands written.
std::size_t replay_session(const log::LogFile& session, const SystemConfig& system,
                           const std::vector<std::pair<std::uint16_t, sim::FollowerModel>>& followers,
                           const std::filesystem::path& command_log);

}  // namespace nuexo::bus
