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


#include "nuexo/datalog/odometry.hpp"

#include <cmath>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"

namespace nuexo::log {

std::vector<double> OdometryState::to_payload() const {
  return {position.x(), position.y(), position.z(), orientation.w(), orientation.x(),
          orientation.y(), orientation.z(), velocity.x(), velocity.y(), velocity.z()};
}

OdometryState odometry_step(const OdometryState& s, const ImuSample& imu, double dt) {
  if (!imu.accel.allFinite() || !imu.gyro.allFinite() || !std::isfinite(dt)) {
    throw ValidationError("odometry sample is not finite");
  }
  OdometryState next;
  next.orientation = (s.orientation * so3_exp(imu.gyro * dt)).normalized();
  const Eigen::Vector3d a = next.orientation * imu.accel - Eigen::Vector3d(0.0, 0.0, kStandardGravity);
  next.position = s.position + s.velocity * dt + 0.5 * a * dt * dt;
  next.velocity = s.velocity + a * dt;
  return next;
}

std::vector<OdometryState> odometry_integrate(const std::vector<ImuSample>& samples, double dt,
                                              OdometryState initial) {
  std::vector<OdometryState> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    initial = odometry_step(initial, s, dt);
    out.push_back(initial);
  }
  return out;
}

}  // namespace nuexo::log
