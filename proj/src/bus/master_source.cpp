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


#include "nuexo/bus/master_source.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nuexo/common/errors.hpp"
#include "nuexo/control/compensation.hpp"
#include "nuexo/kinematics/exo_chain.hpp"
#include "nuexo/kinematics/kinematics.hpp"

namespace nuexo::bus {

std::vector<double> MasterSample::kinematics_payload() const {
  std::vector<double> out = state.to_payload();
  for (const auto* v : {&exo_angles, &exo_rates, &exo_command}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

std::vector<double> MasterSample::binding_payload() const {
  std::vector<double> out(state.upper_arm_wrench.begin(), state.upper_arm_wrench.end());
  out.insert(out.end(), forearm_wrench.begin(), forearm_wrench.end());
  return out;
}

std::vector<double> MasterSample::finger_payload() const {
  std::vector<double> out(state.fingers.begin(), state.fingers.end());
  out.insert(out.end(), state.finger_rates.begin(), state.finger_rates.end());
  return out;
}

Trajectory Trajectory::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  Trajectory t;
  auto number = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw ConfigError("bad trajectory '" + text + "': expected hold, step:AMP[:JOINT] or sine:AMP:FREQ[:JOINT]");
    }
  };
  if (parts.empty()) throw ConfigError("empty trajectory");
  if (parts[0] == "hold" && parts.size() == 1) {
    t.shape = Shape::hold;
  } else if (parts[0] == "step" && (parts.size() == 2 || parts.size() == 3)) {
    t.shape = Shape::step;
    t.amplitude = number(1);
    if (parts.size() == 3) t.joint = static_cast<std::size_t>(number(2));
  } else if (parts[0] == "sine" && (parts.size() == 3 || parts.size() == 4)) {
    t.shape = Shape::sine;
    t.amplitude = number(1);
    t.frequency = number(2);
    if (parts.size() == 4) t.joint = static_cast<std::size_t>(number(3));
  } else {
    number(parts.size());  // throws with the usage message
  }
  if (t.joint >= kin::kExoActiveJoints) throw ConfigError("trajectory joint out of range in '" + text + "'");
  return t;
}

Eigen::VectorXd Trajectory::angles(double t) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(kin::kExoActiveJoints);
  const auto j = static_cast<Eigen::Index>(joint);
  switch (shape) {
    case Shape::hold: break;
    case Shape::step: q[j] = t >= start ? amplitude : 0.0; break;
    case Shape::sine: q[j] = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t); break;
  }
  return q;
}

double Trajectory::fingers(double t) const {
  return finger_amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * 0.25 * t));
}

ExoMaster::ExoMaster(ExoModel model, double dt)
    : model_(std::move(model)),
      dt_(dt),
      chain_(kin::exo_chain(model_.geometry, model_.coupling)),
      shoulder_(kin::exo_shoulder_segment(chain_, model_.coupling)),
      wrist_(kin::exo_wrist_segment(chain_, model_.coupling)),
      joints_(dt),
      fingers_(dt) {
  model_.validate();
}

MasterSample ExoMaster::update(const Eigen::VectorXd& q, double finger_angle,
                               const Eigen::Matrix<double, 6, 1>& upper_wrench,
                               const Eigen::Matrix<double, 6, 1>& forearm_wrench) {
  if (q.size() != kin::kExoActiveJoints || !q.allFinite()) {
    throw ValidationError("exoskeleton reading needs five finite joint angles");
  }
  MasterSample s;
  s.exo_angles = q;
  s.exo_rates = joints_.update(q);
  const kin::JointConfig config(q, s.exo_rates);
  const auto frames = kin::forward_kinematics(config, chain_, model_.coupling);

  MasterState& m = s.state;
  m.shoulder = kin::segment_pose(frames, shoulder_);
  m.wrist = kin::segment_pose(frames, wrist_);
  m.shoulder_rate = m.shoulder.toRotationMatrix().transpose() *
                    kin::segment_jacobian(config, chain_, model_.coupling, shoulder_) * s.exo_rates;
  m.wrist_rate = m.wrist.toRotationMatrix().transpose() *
                 kin::segment_jacobian(config, chain_, model_.coupling, wrist_) * s.exo_rates;
  m.elbow = q[kin::kElbow];
  m.elbow_rate = s.exo_rates[kin::kElbow];
  m.fingers.setConstant(finger_angle);
  m.finger_rates = fingers_.update(m.fingers);
  m.upper_arm_wrench = upper_wrench;
  m.elbow_torque = 0.0;
  s.forearm_wrench = forearm_wrench;

  const Eigen::VectorXd accel =
      last_rates_ ? Eigen::VectorXd((s.exo_rates - *last_rates_) / dt_) : Eigen::VectorXd::Zero(q.size());
  last_rates_ = s.exo_rates;
  const Eigen::VectorXd tau_com = ctl::dynamics_compensation(config, accel, model_.dynamics);
  const auto to_wrench = [](const Eigen::Matrix<double, 6, 1>& w) {
    return ctl::Wrench{w.tail<3>(), w.head<3>()};
  };
  const std::array<ctl::BindingTerm, 2> bindings{
      ctl::BindingTerm{kin::jacobian(config, chain_, model_.coupling, kin::kExoHumeralFrame),
                       to_wrench(upper_wrench)},
      ctl::BindingTerm{kin::jacobian(config, chain_, model_.coupling, kin::kExoForearmFrame),
                       to_wrench(forearm_wrench)},
  };
  const Eigen::VectorXd tau_h = ctl::fcm_assist(bindings, model_.fcm_scale);
  s.exo_command = ctl::exo_command(tau_com, tau_h, model_.torque_limits);
  return s;
}

MasterState master_from_sliders(const Eigen::Vector3d& shoulder, double elbow, double wrist,
                                const Eigen::Matrix<double, 6, 1>& fingers) {
  MasterState m;
  m.shoulder = Eigen::AngleAxisd(shoulder.x(), Eigen::Vector3d::UnitX()) *
               Eigen::AngleAxisd(shoulder.y(), Eigen::Vector3d::UnitY()) *
               Eigen::AngleAxisd(shoulder.z(), Eigen::Vector3d::UnitZ());
  m.wrist = Eigen::Quaterniond(Eigen::AngleAxisd(wrist, Eigen::Vector3d::UnitX()));
  m.elbow = elbow;
  m.fingers = fingers;
  return m;
}

}  // namespace nuexo::bus
