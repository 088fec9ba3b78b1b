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

#include "nuexo/kinematics/segment.hpp"
#include "nuexo/kinematics/types.hpp"

namespace nuexo::kin {

/// Lengths the linkage table leaves open. gh_vertical_offset stands in for the
/// vertical glenohumeral compensation and sits on the last linkage row.
struct ExoGeometry {
  double upper_arm = 0.28;  // d4, m
  double forearm = 0.25;    // d5, m
  double hand = 0.08;       // a6, m
  double gh_vertical_offset = 0.0;
};

/// Active joints of the exoskeleton chain, in order.
enum ExoJoint : std::size_t {
  kShoulderFlexion = 0,  // row 0-1
  kShoulderMotor2 = 1,   // row 1-2, also drives the linkage
  kHumeralRotation = 2,  // row 3-4
  kElbow = 3,            // row 4-5
  kWrist = 4,            // row 5-6
  kExoActiveJoints = 5,
};

/// Rows producing the named exoskeleton frames.
inline constexpr std::size_t kExoLinkageEndFrame = 3;
inline constexpr std::size_t kExoHumeralFrame = 5;
inline constexpr std::size_t kExoForearmFrame = 6;
inline constexpr std::size_t kExoEndFrame = 7;

/// Eight-row chain: two shoulder rows, three passive linkage rows, upper arm,
/// forearm and wrist. The linkage is driven by active joint kShoulderMotor2.
std::vector<DHLink> exo_chain(const ExoGeometry& geometry, const ShoulderCoupling& coupling);

/// Humerus relative to the base, anatomical x = flexion axis, z = humeral axis.
Segment exo_shoulder_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling);
/// Hand relative to the forearm, x = wrist joint axis.
Segment exo_wrist_segment(const std::vector<DHLink>& chain, const ShoulderCoupling& coupling);

}  // namespace nuexo::kin
