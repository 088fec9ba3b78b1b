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

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace nuexo::kin {

/// Linkage parameters of the shoulder mechanism. The passive joints follow the
/// affine law θ2 = gain·θ1 + offset, where θ1 is the driving motor angle.
struct ShoulderCoupling {
  double link1 = 0.150;    // m
  double link2 = 0.187;    // m
  double theta_e = 2.508;  // rad
  double gain = 1.444;
  double offset = 0.938;  // rad

  void validate() const;
  double coupled_angle(double theta1) const { return gain * theta1 + offset; }
};

enum class JointKind { active, passive_coupled, fixed };

/// Which passive linkage joint a passive-coupled link represents.
enum class LinkagePart { first, second, third };

/// Standard DH row: T = Rz(θ + theta_offset) · Tz(d) · Tx(a) · Rx(alpha).
struct DHLink {
  double theta_offset = 0.0;
  double d = 0.0;
  double a = 0.0;
  double alpha = 0.0;
  JointKind kind = JointKind::fixed;
  LinkagePart linkage = LinkagePart::first;
  /// Active joint index driving a passive-coupled link.
  std::size_t driver = 0;

  static DHLink active(double theta_offset, double d, double a, double alpha);
  static DHLink fixed(double theta, double d, double a, double alpha);
  static DHLink passive(LinkagePart part, std::size_t driver, double d, double a, double alpha);

  Eigen::Isometry3d transform(double theta) const;
};

std::size_t count_active(const std::vector<DHLink>& chain);

/// Joint angles (rad) and velocities (rad/s) of the active joints.
struct JointConfig {
  Eigen::VectorXd angles;
  Eigen::VectorXd velocities;

  JointConfig() = default;
  explicit JointConfig(Eigen::VectorXd a)
      : angles(std::move(a)), velocities(Eigen::VectorXd::Zero(angles.size())) {}
  JointConfig(Eigen::VectorXd a, Eigen::VectorXd v) : angles(std::move(a)), velocities(std::move(v)) {}

  static JointConfig zeros(Eigen::Index n) { return JointConfig(Eigen::VectorXd::Zero(n)); }
  Eigen::Index size() const { return angles.size(); }
  /// Throws ConfigError on length mismatch or non-finite entries.
  void validate() const;
};

/// Rigid-body pose; rotation kept as a unit quaternion.
struct Frame {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Frame from_isometry(const Eigen::Isometry3d& iso);
  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }
  Eigen::Isometry3d isometry() const;
};

/// Per-axis angular limits. Each axis reads one active joint of the exoskeleton.
struct RomLimits {
  struct Axis {
    std::string name;
    std::size_t joint = 0;
    double min = 0.0;  // rad
    double max = 0.0;  // rad
  };
  std::vector<Axis> axes;

  /// Shoulder ranges measured on the worn exoskeleton, anatomical sign
  /// convention (flexion/abduction positive, extension/adduction negative).
  static RomLimits shoulder_defaults();
  void validate() const;
};

struct RomVerdict {
  struct AxisVerdict {
    std::string name;
    double value = 0.0;
    bool within = false;
  };
  std::vector<AxisVerdict> axes;
  bool all_within = true;
};

}  // namespace nuexo::kin
