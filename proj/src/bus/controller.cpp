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


#include "nuexo/bus/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"
#include "nuexo/control/impedance.hpp"

namespace nuexo::bus {
namespace {

using sim::kElbowJoint;
using sim::kFinger0;
using sim::kShoulder0;
using sim::kWrist0;

constexpr Eigen::Index kShoulderAxes = 0;
constexpr Eigen::Index kWristAxes = 3;
constexpr Eigen::Index kElbowAxis = 6;
constexpr Eigen::Index kFingerAxes = 7;
constexpr Eigen::Index kFilterAxes = 13;

Eigen::Quaterniond unit(const Eigen::Quaterniond& q, const char* what) {
  if (!q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > kUnitNormTolerance) {
    throw ValidationError(std::string("master ") + what + " quaternion is not unit norm");
  }
  return q.normalized();
}

bool all_frozen(const ctl::TremorFilterState& s, Eigen::Index first, Eigen::Index count) {
  for (Eigen::Index i = first; i < first + count; ++i) {
    if (!s.frozen(i)) return false;
  }
  return true;
}

/// Rebuilds the filtered master. Groups whose axes pass through unchanged keep
/// the original values bit for bit; held groups lose their velocity feed.
MasterState apply_filter(const MasterState& in, const Eigen::VectorXd& raw, const Eigen::VectorXd& out,
                         const ctl::TremorFilterState& s) {
  MasterState m = in;
  if (out.segment<3>(kShoulderAxes) != raw.segment<3>(kShoulderAxes)) {
    m.shoulder = so3_exp(out.segment<3>(kShoulderAxes));
  }
  if (out.segment<3>(kWristAxes) != raw.segment<3>(kWristAxes)) {
    m.wrist = so3_exp(out.segment<3>(kWristAxes));
  }
  m.elbow = out[kElbowAxis];
  m.fingers = out.segment<6>(kFingerAxes);
  if (all_frozen(s, kShoulderAxes, 3)) m.shoulder_rate.setZero();
  if (all_frozen(s, kWristAxes, 3)) m.wrist_rate.setZero();
  if (s.frozen(kElbowAxis)) m.elbow_rate = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    if (s.frozen(kFingerAxes + i)) m.finger_rates[i] = 0.0;
  }
  return m;
}

}  // namespace

Eigen::VectorXd filter_axes(const MasterState& m) {
  Eigen::VectorXd v(kFilterAxes);
  v << so3_log(canonical(m.shoulder)), so3_log(canonical(m.wrist)), m.elbow, m.fingers;
  return v;
}

Eigen::VectorXd teleop_torque(const MasterState& m, const FollowerReport& f, const sim::FollowerModel& model,
                              const ControllerConfig& cfg) {
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(kTorqueCmdSize);

  const Eigen::Matrix3d js = sim::shoulder_body_jacobian(model, f.angles);
  ctl::PoseError shoulder_err;
  shoulder_err.rotation = ctl::quat_error(f.shoulder, m.shoulder);
  shoulder_err.velocity = ctl::velocity_error(m.shoulder_rate, js * f.velocities.segment<3>(kShoulder0));
  ctl::BindingForce binding;
  binding.wrench.torque = m.upper_arm_wrench.head<3>();
  binding.wrench.force = m.upper_arm_wrench.tail<3>();
  tau.segment<3>(kShoulder0) =
      ctl::shoulder_impedance_torque(shoulder_err, js, binding, cfg.shoulder, cfg.shoulder_limit).torque;

  const Eigen::Matrix3d jw = sim::wrist_body_jacobian(model, f.angles);
  ctl::PoseError wrist_err;
  wrist_err.rotation = ctl::quat_error(f.wrist, m.wrist);
  wrist_err.velocity = ctl::velocity_error(m.wrist_rate, jw * f.velocities.segment<3>(kWrist0));
  tau.segment<3>(kWrist0) =
      ctl::shoulder_impedance_torque(wrist_err, jw, ctl::BindingForce{}, cfg.wrist, cfg.wrist_limit).torque;

  tau[kElbowJoint] = ctl::joint_impedance_torque(m.elbow, f.angles[kElbowJoint], m.elbow_rate,
                                                 f.velocities[kElbowJoint], m.elbow_torque, cfg.elbow,
                                                 cfg.elbow_limit);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kFingerCount); ++i) {
    tau[kFinger0 + i] = ctl::joint_impedance_torque(m.fingers[i], f.angles[kFinger0 + i], m.finger_rates[i],
                                                    f.velocities[kFinger0 + i], 0.0, cfg.fingers,
                                                    cfg.finger_limit);
  }
  return tau;
}

Controller::Controller(ControllerConfig config) : config_(std::move(config)) {
  config_.validate();
  filter_.deadband = config_.tremor.deadband;
  filter_.hysteresis_exit = config_.tremor.hysteresis_exit;
  filter_.settle_samples = config_.tremor.settle_samples;
}

void Controller::add_follower(std::uint16_t id, sim::FollowerModel model) {
  model.validate();
  followers_[id] = Slot{std::move(model), std::nullopt, 0, false};
}

std::vector<std::uint16_t> Controller::follower_ids() const {
  std::vector<std::uint16_t> ids;
  for (const auto& [id, slot] : followers_) ids.push_back(id);
  return ids;
}

void Controller::on_master(const MasterState& master) {
  MasterState m = master;
  m.shoulder = unit(master.shoulder, "shoulder");
  m.wrist = unit(master.wrist, "wrist");
  master_ = m;
  master_seen_ = tick_;
}

void Controller::on_follower(std::uint16_t id, const FollowerReport& report) {
  auto& slot = followers_.at(id);
  slot.report = report;
  slot.seen = tick_;
}

TickResult Controller::tick() {
  TickResult result;
  result.tick = tick_;
  if (followers_.empty()) throw std::logic_error("controller has no registered follower");

  bool master_ok = false;
  if (master_) {
    const bool stale = tick_ - master_seen_ > config_.stale_ticks;
    if (stale != master_stale_) result.events.push_back({tick_, true, 0, stale});
    master_stale_ = stale;
    master_ok = !stale;
  }
  if (master_ok) {
    const Eigen::VectorXd raw = filter_axes(*master_);
    auto filtered = ctl::tremor_filter(raw, std::move(filter_));
    filter_ = std::move(filtered.state);
    result.filtered_master = apply_filter(*master_, raw, filtered.output, filter_);
  }

  for (auto& [id, slot] : followers_) {
    if (!slot.report) continue;
    const bool stale = tick_ - slot.seen > config_.stale_ticks;
    if (stale != slot.stale) result.events.push_back({tick_, false, id, stale});
    slot.stale = stale;
    if (stale || !master_ok) continue;
    const Eigen::VectorXd tau = teleop_torque(*result.filtered_master, *slot.report, slot.model, config_);
    result.commands.push_back({id, std::vector<double>(tau.data(), tau.data() + tau.size())});
  }
  ++tick_;
  return result;
}

}  // namespace nuexo::bus
