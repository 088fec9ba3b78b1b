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

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace nuexo {

/// Maximum deviation from unit norm accepted for an input quaternion.
inline constexpr double kUnitNormTolerance = 1e-6;

/// Throws ValidationError when |‖q‖ − 1| > kUnitNormTolerance or q is non-finite.
void require_unit(const Eigen::Quaterniond& q, const char* what);

/// Representative of the double cover with non-negative scalar part.
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

/// Exponential map: rotation vector (axis × angle) to unit quaternion.
Eigen::Quaterniond so3_exp(const Eigen::Vector3d& rotvec);

/// Logarithm of a canonical unit quaternion. Uses the series expansion when the
/// vector part is below 1e-6 so the map stays smooth through identity.
Eigen::Vector3d so3_log(const Eigen::Quaterniond& q);

/// Rotation angle in [0, π] between two orientations.
double angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Intrinsic Z-Y-X angles (yaw, pitch, roll) with R = Rz(yaw)·Ry(pitch)·Rx(roll).
Eigen::Vector3d euler_zyx(const Eigen::Quaterniond& q);
Eigen::Quaterniond from_euler_zyx(const Eigen::Vector3d& yaw_pitch_roll);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

}  // namespace nuexo
