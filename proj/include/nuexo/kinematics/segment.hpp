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

#include <optional>
#include <vector>

#include "nuexo/kinematics/types.hpp"

namespace nuexo::kin {

/// Orientation of one body segment relative to its parent, re-expressed in an
/// anatomical frame whose x axis is the first joint axis of the segment and
/// whose z axis is the last. At rest the calibrated pose is the identity.
struct Segment {
  /// Row index producing the parent frame, -1 for the chain base.
  std::ptrdiff_t parent_frame = -1;
  std::size_t child_frame = 0;
  /// Columns are the anatomical x, y, z axes in parent coordinates at rest.
  Eigen::Matrix3d alignment = Eigen::Matrix3d::Identity();
  /// Parent-to-child rotation at the zero configuration.
  Eigen::Matrix3d rest_relative = Eigen::Matrix3d::Identity();
};

/// Builds the calibration from the rest configuration. `first_link` and
/// `last_link` are the DH rows whose joint axes become anatomical x and z; when
/// omitted or parallel, z is chosen perpendicular to x deterministically.
Segment make_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling,
                     std::ptrdiff_t parent_frame, std::size_t child_frame, std::size_t first_link,
                     std::optional<std::size_t> last_link);

Eigen::Quaterniond segment_pose(const std::vector<Frame>& frames, const Segment& segment);

/// Maps active joint velocities to the spatial angular velocity of the
/// calibrated segment pose (3 × n_active).
Eigen::Matrix3Xd segment_jacobian(const JointConfig& config, const std::vector<DHLink>& chain,
                                  const ShoulderCoupling& coupling, const Segment& segment);

}  // namespace nuexo::kin
