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
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nuexo/bus/config.hpp"
#include "nuexo/bus/payloads.hpp"
#include "nuexo/control/tremor_filter.hpp"
#include "nuexo/follower/follower.hpp"

namespace nuexo::bus {

/// One impedance evaluation for a single follower: shoulder and wrist in pose
/// form against the follower's body Jacobians, elbow and fingers per joint.
/// Returns the 13 joint torques, each group clamped to its limit.
Eigen::VectorXd teleop_torque(const MasterState& master, const FollowerReport& follower,
                              const sim::FollowerModel& model, const ControllerConfig& config);

/// Master rotation vectors and joint angles as one vector, the axes the tremor
/// filter works on: shoulder (3), wrist (3), elbow (1), fingers (6).
Eigen::VectorXd filter_axes(const MasterState& master);

struct StalenessEvent {
  std::uint64_t tick = 0;
  bool master = false;          // otherwise a follower
  std::uint16_t follower_id = 0;
  bool stale = true;            // false when the source recovers
};

struct Command {
  std::uint16_t follower_id = 0;
  std::vector<double> torque;  // kTorqueCmdSize entries
};

struct TickResult {
  std::uint64_t tick = 0;
  std::vector<Command> commands;
  std::vector<StalenessEvent> events;
  std::optional<MasterState> filtered_master;
};

/// Teleoperation controller: filters the master stream once per tick and
/// fans the same filtered reference out to every registered follower.
class Controller {
 public:
  explicit Controller(ControllerConfig config);

  void add_follower(std::uint16_t id, sim::FollowerModel model);
  bool has_follower(std::uint16_t id) const { return followers_.count(id) != 0; }
  std::vector<std::uint16_t> follower_ids() const;

  /// Latest master sample; quaternions are renormalized. Throws
  /// ValidationError if they are far from unit norm.
  void on_master(const MasterState& master);
  /// Throws std::out_of_range for an unregistered follower.
  void on_follower(std::uint16_t id, const FollowerReport& report);

  /// Runs one control period. Withholds commands while the master or a
  /// follower is stale and reports each stale/recovered transition once.
  TickResult tick();

  std::uint64_t ticks() const { return tick_; }
  const ControllerConfig& config() const { return config_; }

 private:
  struct Slot {
    sim::FollowerModel model;
    std::optional<FollowerReport> report;
    std::uint64_t seen = 0;
    bool stale = false;
  };

  ControllerConfig config_;
  ctl::TremorFilterState filter_;
  std::optional<MasterState> master_;
  std::uint64_t master_seen_ = 0;
  bool master_stale_ = false;
  std::map<std::uint16_t, Slot> followers_;
  std::uint64_t tick_ = 0;
};

}  // namespace nuexo::bus
