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

#include <cmath>
#include <numbers>
#include <string>

#include "nuexo/common/errors.hpp"
#include "nuexo/kinematics/exo_chain.hpp"
#include "nuexo/kinematics/kinematics.hpp"
#include "nuexo/kinematics/segment.hpp"
#include "nuexo/kinematics/types.hpp"

namespace nuexo::kin {

void ShoulderCoupling::validate() const {
  if (!(link1 > 0.0) || !(link2 > 0.0)) throw ConfigError("coupling link lengths must be positive");
  if (!std::isfinite(link1) || !std::isfinite(link2) || !std::isfinite(theta_e) ||
      !std::isfinite(gain) || !std::isfinite(offset)) {
    throw ConfigError("coupling parameters must be finite");
  }
}

DHLink DHLink::active(double theta_offset, double d, double a, double alpha) {
  return DHLink{theta_offset, d, a, alpha, JointKind::active, LinkagePart::first, 0};
}

DHLink DHLink::fixed(double theta, double d, double a, double alpha) {
  return DHLink{theta, d, a, alpha, JointKind::fixed, LinkagePart::first, 0};
}

DHLink DHLink::passive(LinkagePart part, std::size_t driver, double d, double a, double alpha) {
  return DHLink{0.0, d, a, alpha, JointKind::passive_coupled, part, driver};
}

Eigen::Isometry3d DHLink::transform(double theta) const {
  const double t = theta + theta_offset;
  Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
  const double ct = std::cos(t), st = std::sin(t);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  m.linear() << ct, -st * ca, st * sa,  //
      st, ct * ca, -ct * sa,            //
      0.0, sa, ca;
  m.translation() << a * ct, a * st, d;
  return m;
}

std::size_t count_active(const std::vector<DHLink>& chain) {
  std::size_t n = 0;
  for (const auto& l : chain) n += l.kind == JointKind::active ? 1 : 0;
  return n;
}

void JointConfig::validate() const {
  if (angles.size() != velocities.size()) {
    throw ConfigError("joint config: " + std::to_string(angles.size()) + " angles but " +
                      std::to_string(velocities.size()) + " velocities");
  }
  if (!angles.allFinite() || !velocities.allFinite()) {
    throw ConfigError("joint config contains non-finite values");
  }
}

Frame Frame::from_isometry(const Eigen::Isometry3d& iso) {
  Frame f;
  f.rotation = Eigen::Quaterniond(iso.linear()).normalized();
  f.translation = iso.translation();
  return f;
}

Eigen::Isometry3d Frame::isometry() const {
  Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
  m.linear() = rotation.toRotationMatrix();
  m.translation() = translation;
  return m;
}

RomLimits RomLimits::shoulder_defaults() {
  constexpr double deg = std::numbers::pi / 180.0;
  RomLimits r;
  r.axes = {
      {"flexion_extension", kShoulderFlexion, -60.0 * deg, 180.0 * deg},
      {"horizontal_flexion_extension", kShoulderMotor2, -135.0 * deg, 30.0 * deg},
      {"abduction_adduction", kHumeralRotation, -30.0 * deg, 150.0 * deg},
  };
  return r;
}

void RomLimits::validate() const {
  for (const auto& a : axes) {
    if (!(a.min < a.max)) throw ConfigError("ROM axis '" + a.name + "' needs min < max");
  }
}

namespace {

Eigen::Vector3d unit_perpendicular(const Eigen::Vector3d& x) {
  // Least-aligned basis vector keeps the cross product well conditioned.
  Eigen::Index i = 0;
  x.cwiseAbs().minCoeff(&i);
  return x.cross(Eigen::Vector3d::Unit(i)).normalized();
}

Eigen::Matrix3d frame_rotation(const std::vector<Frame>& frames, std::ptrdiff_t index) {
  return index < 0 ? Eigen::Matrix3d::Identity() : frames.at(index).rotation_matrix();
}

// Rotation axis of DH row `link`: z of the preceding frame, in base coordinates.
Eigen::Vector3d joint_axis(const std::vector<Frame>& frames, std::size_t link) {
  if (link == 0) return Eigen::Vector3d::UnitZ();
  return frames[link - 1].rotation_matrix().col(2);
}

}  // namespace

Segment make_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling,
                     std::ptrdiff_t parent_frame, std::size_t child_frame, std::size_t first_link,
                     std::optional<std::size_t> last_link) {
  const auto frames = forward_kinematics(JointConfig::zeros(count_active(chain)), chain, coupling);
  const Eigen::Matrix3d parent = frame_rotation(frames, parent_frame);
  const Eigen::Matrix3d child = frames.at(child_frame).rotation_matrix();

  const Eigen::Vector3d x = (parent.transpose() * joint_axis(frames, first_link)).normalized();
  Eigen::Vector3d z = unit_perpendicular(x);
  if (last_link) {
    const Eigen::Vector3d cand = parent.transpose() * joint_axis(frames, *last_link);
    const Eigen::Vector3d ortho = cand - cand.dot(x) * x;
    if (ortho.norm() > 1e-6) z = ortho.normalized();
  }
  Segment s;
  s.parent_frame = parent_frame;
  s.child_frame = child_frame;
  s.alignment.col(0) = x;
  s.alignment.col(1) = z.cross(x);
  s.alignment.col(2) = z;
  s.rest_relative = parent.transpose() * child;
  return s;
}

Eigen::Quaterniond segment_pose(const std::vector<Frame>& frames, const Segment& segment) {
  const Eigen::Matrix3d parent = frame_rotation(frames, segment.parent_frame);
  const Eigen::Matrix3d relative = parent.transpose() * frames.at(segment.child_frame).rotation_matrix();
  const Eigen::Matrix3d& a = segment.alignment;
  const Eigen::Matrix3d pose = a.transpose() * relative * segment.rest_relative.transpose() * a;
  return Eigen::Quaterniond(pose).normalized();
}

Eigen::Matrix3Xd segment_jacobian(const JointConfig& config, const std::vector<DHLink>& chain,
                                  const ShoulderCoupling& coupling, const Segment& segment) {
  const auto frames = forward_kinematics(config, chain, coupling);
  const Eigen::Matrix3d parent = frame_rotation(frames, segment.parent_frame);
  Eigen::Matrix3Xd j = jacobian(config, chain, coupling,
                                static_cast<std::ptrdiff_t>(segment.child_frame))
                           .topRows<3>();
  if (segment.parent_frame >= 0) {
    j -= jacobian(config, chain, coupling, segment.parent_frame).topRows<3>();
  }
  return segment.alignment.transpose() * parent.transpose() * j;
}

std::vector<DHLink> exo_chain(const ExoGeometry& g, const ShoulderCoupling& c) {
  constexpr double pi = std::numbers::pi;
  return {
      DHLink::active(-pi / 2, 0.0, 0.0, -pi / 2),
      DHLink::active(0.0, 0.0, 0.0, pi / 2),
      DHLink::passive(LinkagePart::first, kShoulderMotor2, 0.0, c.link1, 0.0),
      DHLink::passive(LinkagePart::second, kShoulderMotor2, 0.0, c.link2, 0.0),
      DHLink::passive(LinkagePart::third, kShoulderMotor2, g.gh_vertical_offset, 0.0, -pi / 2),
      DHLink::active(0.0, g.upper_arm, 0.0, -pi / 2),
      DHLink::active(0.0, g.forearm, 0.0, pi / 2),
      DHLink::active(0.0, 0.0, g.hand, pi / 2),
  };
}

Segment exo_shoulder_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling) {
  return make_segment(chain, coupling, -1, kExoHumeralFrame, 0, kExoHumeralFrame);
}

Segment exo_wrist_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling) {
  return make_segment(chain, coupling, kExoForearmFrame, kExoEndFrame, kExoEndFrame, std::nullopt);
}

}  // namespace nuexo::kin
