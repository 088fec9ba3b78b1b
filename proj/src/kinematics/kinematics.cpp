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

#include "nuexo/kinematics/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"

namespace nuexo::kin {

LinkageAngles coupled_linkage_angles(double theta1, const ShoulderCoupling& c) {
  LinkageAngles out;
  out.theta_2 = c.coupled_angle(theta1);
  // The first passive joint swings by the coupled increment, the second holds
  // the linkage at θ_E, the third closes the loop to the total angle θ2.
  out.theta_2_1 = out.theta_2 - c.offset;
  out.theta_2_2 = c.theta_e - std::numbers::pi;
  out.theta_3 = out.theta_2 - out.theta_2_1;
  return out;
}

double linkage_rate(LinkagePart part, const ShoulderCoupling& c) {
  switch (part) {
    case LinkagePart::first:
      return c.gain;
    case LinkagePart::second:
      return 0.0;
    case LinkagePart::third:
      return c.gain - linkage_rate(LinkagePart::first, c);
  }
  return 0.0;
}

namespace {

double passive_angle(const LinkageAngles& a, LinkagePart part) {
  switch (part) {
    case LinkagePart::first:
      return a.theta_2_1;
    case LinkagePart::second:
      return a.theta_2_2;
    case LinkagePart::third:
      return a.theta_3;
  }
  return 0.0;
}

void check_dimensions(const JointConfig& config, const std::vector<DHLink>& chain) {
  const auto n = count_active(chain);
  if (static_cast<std::size_t>(config.angles.size()) != n) {
    throw ConfigError("joint config has " + std::to_string(config.angles.size()) +
                      " angles, chain has " + std::to_string(n) + " active joints");
  }
  if (!config.angles.allFinite()) throw ConfigError("joint config contains non-finite angles");
  for (const auto& l : chain) {
    if (l.kind == JointKind::passive_coupled && l.driver >= n) {
      throw ConfigError("passive link driver index out of range");
    }
  }
}

}  // namespace

std::vector<Frame> forward_kinematics(const JointConfig& config, const std::vector<DHLink>& chain,
                                      const ShoulderCoupling& coupling) {
  check_dimensions(config, chain);
  std::vector<Frame> frames;
  frames.reserve(chain.size());
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  std::size_t active = 0;
  for (const auto& link : chain) {
    double theta = 0.0;
    switch (link.kind) {
      case JointKind::active:
        theta = config.angles[static_cast<Eigen::Index>(active++)];
        break;
      case JointKind::passive_coupled:
        theta = passive_angle(
            coupled_linkage_angles(config.angles[static_cast<Eigen::Index>(link.driver)], coupling),
            link.linkage);
        break;
      case JointKind::fixed:
        break;
    }
    pose = pose * link.transform(theta);
    frames.push_back(Frame::from_isometry(pose));
  }
  return frames;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const JointConfig& config,
                                                  const std::vector<DHLink>& chain,
                                                  const ShoulderCoupling& coupling,
                                                  std::ptrdiff_t frame_index) {
  const auto frames = forward_kinematics(config, chain, coupling);
  if (frame_index < 0) frame_index = static_cast<std::ptrdiff_t>(chain.size()) - 1;
  if (frame_index >= static_cast<std::ptrdiff_t>(chain.size())) {
    throw ConfigError("jacobian frame index out of range");
  }
  const Eigen::Vector3d tip = frames[frame_index].translation;

  Eigen::Matrix<double, 6, Eigen::Dynamic> j =
      Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, static_cast<Eigen::Index>(count_active(chain)));
  std::size_t active = 0;
  for (std::ptrdiff_t k = 0; k <= frame_index; ++k) {
    const auto& link = chain[k];
    double rate = 0.0;
    Eigen::Index column = 0;
    if (link.kind == JointKind::active) {
      column = static_cast<Eigen::Index>(active++);
      rate = 1.0;
    } else if (link.kind == JointKind::passive_coupled) {
      column = static_cast<Eigen::Index>(link.driver);
      rate = linkage_rate(link.linkage, coupling);
    } else {
      continue;
    }
    const Eigen::Vector3d z =
        k == 0 ? Eigen::Vector3d::UnitZ() : frames[k - 1].rotation_matrix().col(2).eval();
    const Eigen::Vector3d origin = k == 0 ? Eigen::Vector3d::Zero() : frames[k - 1].translation;
    j.block<3, 1>(0, column) += rate * z;
    j.block<3, 1>(3, column) += rate * z.cross(tip - origin);
  }
  return j;
}

HumeralPose humeral_pose(const JointConfig& config, const std::vector<DHLink>& chain,
                         const ShoulderCoupling& coupling, std::size_t humeral_frame) {
  const auto frames = forward_kinematics(config, chain, coupling);
  HumeralPose out;
  out.orientation = canonical(frames.at(humeral_frame).rotation);
  out.euler = euler_zyx(out.orientation);
  out.near_gimbal_lock = std::abs(std::abs(out.euler.y()) - std::numbers::pi / 2) < 1e-6;
  return out;
}

std::vector<Eigen::Vector3d> gh_center_displacement(std::span<const double> theta1_sweep,
                                                    const ShoulderCoupling& coupling) {
  coupling.validate();
  // The three linkage rows in isolation, expressed in the motor-2 link frame.
  const DHLink first = DHLink::passive(LinkagePart::first, 0, 0.0, coupling.link1, 0.0);
  const DHLink second = DHLink::passive(LinkagePart::second, 0, 0.0, coupling.link2, 0.0);
  const auto center = [&](double theta1) {
    const auto a = coupled_linkage_angles(theta1, coupling);
    return (first.transform(a.theta_2_1) * second.transform(a.theta_2_2)).translation().eval();
  };
  const Eigen::Vector3d reference = center(0.0);
  std::vector<Eigen::Vector3d> out;
  out.reserve(theta1_sweep.size());
  for (double t : theta1_sweep) {
    if (!std::isfinite(t)) throw ValidationError("GH sweep contains a non-finite angle");
    Eigen::Vector3d d = center(t) - reference;
    d.z() = 0.0;
    out.push_back(d);
  }
  return out;
}

RomVerdict check_rom(const JointConfig& config, const RomLimits& limits) {
  // Boundary values converted from degrees must be accepted.
  constexpr double kEdge = 1e-9;
  RomVerdict v;
  for (const auto& axis : limits.axes) {
    if (axis.joint >= static_cast<std::size_t>(config.angles.size())) {
      throw ConfigError("ROM axis '" + axis.name + "' reads joint " + std::to_string(axis.joint) +
                        " outside the config");
    }
    const double q = config.angles[static_cast<Eigen::Index>(axis.joint)];
    const bool within = q >= axis.min - kEdge && q <= axis.max + kEdge;
    v.axes.push_back({axis.name, q, within});
    v.all_within = v.all_within && within;
  }
  return v;
}

}  // namespace nuexo::kin
