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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "nuexo/common/config_file.hpp"
#include "nuexo/kinematics/segment.hpp"
#include "nuexo/kinematics/types.hpp"

namespace nuexo::sim {

/// Joint layout shared by every follower platform.
enum FollowerJointIndex : Eigen::Index {
  kShoulder0 = 0,  // shoulder joints 0..2
  kElbowJoint = 3,
  kWrist0 = 4,     // wrist joints 4..6
  kFinger0 = 7,    // finger joints 7..12
  kFollowerJoints = 13,
  kChainJoints = 7,  // shoulder, elbow and wrist live on the DH chain
  kFingerJoints = 6,
};

struct FollowerJoint {
  double inertia = 0.0;         // kg·m²
  double damping = 0.0;         // N·m·s/rad
  double torque_limit = 0.0;    // N·m
  double angle_min = 0.0;       // rad
  double angle_max = 0.0;       // rad
  double gravity_torque = 0.0;  // m·g·r, N·m; load is gravity_torque·cos(q)
};

struct FollowerGeometry {
  double upper_arm = 0.26;
  double forearm = 0.24;
  double hand = 0.08;
};

/// Diagonal joint-space dynamics of a humanoid arm plus its kinematic chain.
struct FollowerModel {
  std::string name;
  std::vector<FollowerJoint> joints;  // kFollowerJoints entries
  bool gravity = false;
  double encoder_noise = 0.0;  // rad, σ of measurement noise
  FollowerGeometry geometry;
  std::vector<kin::DHLink> chain;
  kin::Segment shoulder;
  kin::Segment wrist;

  /// Throws ConfigError on any invariant violation.
  void validate() const;
  Eigen::VectorXd torque_limits() const;
  /// Gravity load g(q); zero when gravity is off.
  Eigen::VectorXd gravity_load(const Eigen::VectorXd& q) const;
};

/// Seven-row arm: three intersecting shoulder axes, elbow, three wrist axes.
std::vector<kin::DHLink> follower_chain(const FollowerGeometry& geometry);

/// Builds the chain and segment calibrations for a model whose joints are set.
void finalize_model(FollowerModel& model);

FollowerModel make_model(const ConfigFile& cfg);
FollowerModel load_model(const std::filesystem::path& path);
/// Loads `<name>.cfg` from the preset directory: $NUEXO_PRESET_DIR if set,
/// else the presets/ directory of the source tree.
FollowerModel load_preset(const std::string& name);
std::filesystem::path preset_directory();

struct FollowerState {
  kin::JointConfig joints = kin::JointConfig::zeros(kFollowerJoints);
  Eigen::VectorXd applied_torque = Eigen::VectorXd::Zero(kFollowerJoints);
  double time = 0.0;  // s
};

/// Semi-implicit Euler step of I·q̈ = clamp(τ) − b·q̇ − g(q). Joints hitting an
/// angle limit are clamped with their velocity zeroed. dt must lie in (0, 0.01].
/// Throws ValidationError on non-finite torque or bad dt.
FollowerState step(const FollowerState& state, const Eigen::VectorXd& tau, double dt,
                   const FollowerModel& model);

struct FollowerMeasurement {
  kin::JointConfig joints;
  Eigen::Quaterniond shoulder = Eigen::Quaterniond::Identity();
  Eigen::Quaterniond wrist = Eigen::Quaterniond::Identity();
};

/// Joint readings with optional Gaussian encoder noise, plus calibrated
/// shoulder and wrist poses computed from the (noisy) readings.
FollowerMeasurement measure(const FollowerState& state, const FollowerModel& model,
                            std::mt19937_64* rng = nullptr);

/// Calibrated segment poses from joint angles alone.
Eigen::Quaterniond shoulder_pose(const FollowerModel& model, const Eigen::VectorXd& q);
Eigen::Quaterniond wrist_pose(const FollowerModel& model, const Eigen::VectorXd& q);

/// Body-frame angular Jacobians (3×3) of the calibrated shoulder / wrist pose
/// with respect to the three joints of that segment.
Eigen::Matrix3d shoulder_body_jacobian(const FollowerModel& model, const Eigen::VectorXd& q);
Eigen::Matrix3d wrist_body_jacobian(const FollowerModel& model, const Eigen::VectorXd& q);

/// One JSON object per line for debugging dumps.
std::string state_to_json_line(const FollowerState& state);

}  // namespace nuexo::sim
