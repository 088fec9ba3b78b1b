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

#include <span>
#include <vector>

#include "nuexo/kinematics/types.hpp"

namespace nuexo::kin {

/// Passive joint angles of the shoulder linkage for a given motor angle.
struct LinkageAngles {
  double theta_2_1 = 0.0;
  double theta_2_2 = 0.0;
  double theta_3 = 0.0;
  /// Total coupled angle gain·θ1 + offset.
  double theta_2 = 0.0;
};

LinkageAngles coupled_linkage_angles(double theta1, const ShoulderCoupling& coupling);

/// d(passive angle)/d(θ1) for each linkage part.
double linkage_rate(LinkagePart part, const ShoulderCoupling& coupling);

/// Base-to-link frames, one per DH row. Passive-coupled rows take their angle
/// from the linkage driven by their `driver` joint.
std::vector<Frame> forward_kinematics(const JointConfig& config, const std::vector<DHLink>& chain,
                                      const ShoulderCoupling& coupling);

/// Geometric Jacobian (angular rows first, then linear) of the frame produced by
/// row `frame_index`, both expressed in the base frame. Defaults to the end frame.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const JointConfig& config,
                                                  const std::vector<DHLink>& chain,
                                                  const ShoulderCoupling& coupling,
                                                  std::ptrdiff_t frame_index = -1);

struct HumeralPose {
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  /// Z-Y-X (yaw, pitch, roll) of `orientation`.
  Eigen::Vector3d euler = Eigen::Vector3d::Zero();
  /// |pitch| within 1e-6 of π/2; the Euler angles are not unique there.
  bool near_gimbal_lock = false;
};

HumeralPose humeral_pose(const JointConfig& config, const std::vector<DHLink>& chain,
                         const ShoulderCoupling& coupling, std::size_t humeral_frame);

/// Horizontal-plane displacement of the glenohumeral center carried by the
/// linkage, relative to θ1 = 0. Expressed in the frame of the motor-2 link:
/// x radial along the link at rest, y forward, z always zero.
std::vector<Eigen::Vector3d> gh_center_displacement(std::span<const double> theta1_sweep,
                                                    const ShoulderCoupling& coupling);

RomVerdict check_rom(const JointConfig& config, const RomLimits& limits);

}  // namespace nuexo::kin
