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


#include "nuexo/bus/payloads.hpp"

#include <string>

namespace nuexo::bus {
namespace {

void check_size(const std::vector<double>& p, std::size_t expected, const char* what) {
  if (p.size() != expected) {
    throw ProtocolError(ProtocolError::Kind::bad_length,
                        std::string(what) + " payload needs " + std::to_string(expected) +
                            " floats, got " + std::to_string(p.size()));
  }
}

void put_quat(std::vector<double>& out, const Eigen::Quaterniond& q) {
  out.insert(out.end(), {q.w(), q.x(), q.y(), q.z()});
}

template <typename Derived>
void put_vec(std::vector<double>& out, const Eigen::MatrixBase<Derived>& v) {
  out.insert(out.end(), v.derived().data(), v.derived().data() + v.size());
}

class Cursor {
 public:
  explicit Cursor(const std::vector<double>& p) : p_(p) {}
  double scalar() { return p_[i_++]; }
  Eigen::Quaterniond quat() {
    Eigen::Quaterniond q(p_[i_], p_[i_ + 1], p_[i_ + 2], p_[i_ + 3]);
    i_ += 4;
    return q;
  }
  template <int N>
  Eigen::Matrix<double, N, 1> vec() {
    Eigen::Matrix<double, N, 1> v = Eigen::Map<const Eigen::Matrix<double, N, 1>>(p_.data() + i_);
    i_ += N;
    return v;
  }
  Eigen::VectorXd dyn(Eigen::Index n) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p_.data() + i_, n);
    i_ += static_cast<std::size_t>(n);
    return v;
  }

 private:
  const std::vector<double>& p_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<double> MasterState::to_payload() const {
  std::vector<double> out;
  out.reserve(kSize);
  put_quat(out, shoulder);
  put_quat(out, wrist);
  out.push_back(elbow);
  put_vec(out, fingers);
  put_vec(out, shoulder_rate);
  put_vec(out, wrist_rate);
  out.push_back(elbow_rate);
  put_vec(out, finger_rates);
  put_vec(out, upper_arm_wrench);
  out.push_back(elbow_torque);
  return out;
}

MasterState MasterState::from_payload(const std::vector<double>& payload) {
  check_size(payload, kSize, "MasterState");
  Cursor c(payload);
  MasterState m;
  m.shoulder = c.quat();
  m.wrist = c.quat();
  m.elbow = c.scalar();
  m.fingers = c.vec<6>();
  m.shoulder_rate = c.vec<3>();
  m.wrist_rate = c.vec<3>();
  m.elbow_rate = c.scalar();
  m.finger_rates = c.vec<6>();
  m.upper_arm_wrench = c.vec<6>();
  m.elbow_torque = c.scalar();
  return m;
}

std::vector<double> FollowerReport::to_payload() const {
  std::vector<double> out;
  out.reserve(kSize);
  put_vec(out, angles);
  put_vec(out, velocities);
  put_quat(out, shoulder);
  put_quat(out, wrist);
  return out;
}

FollowerReport FollowerReport::from_payload(const std::vector<double>& payload) {
  check_size(payload, kSize, "FollowerState");
  Cursor c(payload);
  FollowerReport r;
  r.angles = c.dyn(kArmJoints);
  r.velocities = c.dyn(kArmJoints);
  r.shoulder = c.quat();
  r.wrist = c.quat();
  return r;
}

}  // namespace nuexo::bus
