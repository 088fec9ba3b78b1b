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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nuexo/bus/config.hpp"
#include "nuexo/bus/payloads.hpp"
#include "nuexo/control/tremor_filter.hpp"
#include "nuexo/kinematics/segment.hpp"

namespace nuexo::bus {

/// Everything the master node knows about one exoskeleton sample.
struct MasterSample {
  MasterState state;
  Eigen::VectorXd exo_angles;   // rad, active joints
  Eigen::VectorXd exo_rates;    // rad/s, estimated
  Eigen::VectorXd exo_command;  // N·m, compensation plus coordination assist
  Eigen::Matrix<double, 6, 1> forearm_wrench = Eigen::Matrix<double, 6, 1>::Zero();

  /// Layout of the exo-kinematics log stream.
  std::vector<double> kinematics_payload() const;
  /// Layout of the binding-force log stream.
  std::vector<double> binding_payload() const;
  /// Layout of the finger log stream.
  std::vector<double> finger_payload() const;
};

enum class Shape { hold, step, sine };

/// Scripted exoskeleton motion on one active joint.
struct Trajectory {
  Shape shape = Shape::sine;
  std::size_t joint = kin::kShoulderFlexion;
  double amplitude = 0.4;  // rad
  double frequency = 0.5;  // Hz, sine only
  double start = 0.0;      // s, step only
  double finger_amplitude = 0.0;  // rad, slow grasp sine on all fingers

  /// Parses "hold", "step:AMP", "sine:AMP:FREQ" with an optional ":JOINT".
  static Trajectory parse(const std::string& text);
  Eigen::VectorXd angles(double t) const;
  double fingers(double t) const;
};

/// Turns exoskeleton joint readings into master states: forward kinematics
/// to the calibrated shoulder and wrist poses, backward-difference joint
/// rates, and the exoskeleton's own torque command.
class ExoMaster {
 public:
  ExoMaster(ExoModel model, double dt);

  /// Feed one reading per tick, in time order.
  MasterSample update(const Eigen::VectorXd& exo_angles, double fingers = 0.0,
                      const Eigen::Matrix<double, 6, 1>& upper_wrench = Eigen::Matrix<double, 6, 1>::Zero(),
                      const Eigen::Matrix<double, 6, 1>& forearm_wrench = Eigen::Matrix<double, 6, 1>::Zero());

  const ExoModel& model() const { return model_; }

 private:
  ExoModel model_;
  double dt_;
  std::vector<kin::DHLink> chain_;
  kin::Segment shoulder_;
  kin::Segment wrist_;
  ctl::VelocityEstimator joints_;
  ctl::VelocityEstimator fingers_;
  std::optional<Eigen::VectorXd> last_rates_;
};

/// Master state from joint-space slider values (the console's stand-in for the
/// exoskeleton): shoulder from the three shoulder sliders as anatomical
/// rotations, wrist about its flexion axis, plus elbow and fingers.
MasterState master_from_sliders(const Eigen::Vector3d& shoulder, double elbow, double wrist,
                                const Eigen::Matrix<double, 6, 1>& fingers);

}  // namespace nuexo::bus
