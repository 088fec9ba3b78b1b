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

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace nuexo::log {

inline constexpr double kStandardGravity = 9.81;

/// Body-frame specific force (m/s²) and angular rate (rad/s).
struct ImuSample {
  Eigen::Vector3d accel = Eigen::Vector3d(0.0, 0.0, kStandardGravity);
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();
};

struct OdometryState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  /// [position, orientation w x y z, velocity], the odometry stream layout.
  std::vector<double> to_payload() const;
};

/// Strapdown dead reckoning: attitude from the gyro, then world acceleration
/// R·f − g integrated twice with the updated attitude. No drift correction.
OdometryState odometry_step(const OdometryState& state, const ImuSample& sample, double dt);
std::vector<OdometryState> odometry_integrate(const std::vector<ImuSample>& samples, double dt,
                                              OdometryState initial = {});

}  // namespace nuexo::log
