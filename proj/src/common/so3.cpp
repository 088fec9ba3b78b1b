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

#include "nuexo/common/so3.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nuexo/common/errors.hpp"

namespace nuexo {

void require_unit(const Eigen::Quaterniond& q, const char* what) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance) {
    throw ValidationError(std::string(what) + ": quaternion norm " + std::to_string(n) +
                          " is not unit");
  }
}

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  if (q.w() < 0.0) return Eigen::Quaterniond(-q.w(), -q.x(), -q.y(), -q.z());
  return q;
}

Eigen::Quaterniond so3_exp(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-6) {
    const double a2 = angle * angle;
    const Eigen::Vector3d v = 0.5 * (1.0 - a2 / 24.0) * rotvec;
    return Eigen::Quaterniond(1.0 - a2 / 8.0, v.x(), v.y(), v.z()).normalized();
  }
  const Eigen::Vector3d v = (std::sin(0.5 * angle) / angle) * rotvec;
  return Eigen::Quaterniond(std::cos(0.5 * angle), v.x(), v.y(), v.z());
}

Eigen::Vector3d so3_log(const Eigen::Quaterniond& q) {
  const Eigen::Vector3d v = q.vec();
  const double s = v.norm();
  const double w = q.w();
  if (s < 1e-6) {
    // 2·atan2(s, w)/s expanded around s = 0.
    return (2.0 / w) * (1.0 - (s * s) / (3.0 * w * w)) * v;
  }
  return (2.0 * std::atan2(s, w) / s) * v;
}

double angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const Eigen::Quaterniond d = canonical(a.conjugate() * b);
  return 2.0 * std::atan2(d.vec().norm(), d.w());
}

Eigen::Vector3d euler_zyx(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  return {yaw, pitch, roll};
}

Eigen::Quaterniond from_euler_zyx(const Eigen::Vector3d& ypr) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(ypr.x(), Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(ypr.y(), Eigen::Vector3d::UnitY()) *
                            Eigen::AngleAxisd(ypr.z(), Eigen::Vector3d::UnitX()));
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace nuexo
