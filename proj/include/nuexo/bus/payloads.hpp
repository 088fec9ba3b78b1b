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

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "nuexo/bus/wire.hpp"

namespace nuexo::bus {

inline constexpr std::size_t kFingerCount = 6;
inline constexpr std::size_t kArmJoints = 13;
inline constexpr std::uint16_t kMasterStream = 0;

/// Operator-side state published by the master node. Angular velocities are
/// expressed in the body frame of the calibrated segment; the upper-arm
/// binding wrench is [torque; force] in the humeral frame.
struct MasterState {
  Eigen::Quaterniond shoulder = Eigen::Quaterniond::Identity();
  Eigen::Quaterniond wrist = Eigen::Quaterniond::Identity();
  double elbow = 0.0;
  Eigen::Matrix<double, 6, 1> fingers = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Vector3d shoulder_rate = Eigen::Vector3d::Zero();
  Eigen::Vector3d wrist_rate = Eigen::Vector3d::Zero();
  double elbow_rate = 0.0;
  Eigen::Matrix<double, 6, 1> finger_rates = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 1> upper_arm_wrench = Eigen::Matrix<double, 6, 1>::Zero();
  double elbow_torque = 0.0;  // τ_ft at the elbow cuff

  static constexpr std::size_t kSize = 35;
  std::vector<double> to_payload() const;
  /// Throws ProtocolError(bad_length) on a wrong float count.
  static MasterState from_payload(const std::vector<double>& payload);
};

/// Follower readings: joint angles and velocities in follower joint order,
/// followed by the calibrated shoulder and wrist poses (w, x, y, z).
struct FollowerReport {
  Eigen::VectorXd angles = Eigen::VectorXd::Zero(kArmJoints);
  Eigen::VectorXd velocities = Eigen::VectorXd::Zero(kArmJoints);
  Eigen::Quaterniond shoulder = Eigen::Quaterniond::Identity();
  Eigen::Quaterniond wrist = Eigen::Quaterniond::Identity();

  static constexpr std::size_t kSize = 34;
  std::vector<double> to_payload() const;
  static FollowerReport from_payload(const std::vector<double>& payload);
};

inline constexpr std::size_t kTorqueCmdSize = kArmJoints;
inline constexpr std::size_t kLogMetaSize = 3;  // wall clock s, tick rate Hz, follower count

}  // namespace nuexo::bus
