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

#include "nuexo/control/impedance.hpp"

#include <algorithm>
#include <cmath>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"

namespace nuexo::ctl {

ImpedanceGains ImpedanceGains::uniform(Eigen::Index n, double kp, double kd, double lambda) {
  return ImpedanceGains{Eigen::VectorXd::Constant(n, kp), Eigen::VectorXd::Constant(n, kd), lambda};
}

void ImpedanceGains::validate() const {
  if (stiffness.size() != damping.size()) throw ConfigError("gain vectors differ in length");
  if ((stiffness.array() < 0.0).any() || (damping.array() < 0.0).any() || !(lambda >= 0.0) ||
      !stiffness.allFinite() || !damping.allFinite()) {
    throw ConfigError("impedance gains must be finite and non-negative");
  }
}

Eigen::Quaterniond quat_error(const Eigen::Quaterniond& q_s, const Eigen::Quaterniond& q_m) {
  require_unit(q_s, "follower orientation");
  require_unit(q_m, "master orientation");
  return canonical((q_s.conjugate() * q_m).normalized());
}

Eigen::Vector3d velocity_error(const Eigen::Vector3d& qdot_m, const Eigen::Vector3d& qdot_s) {
  return qdot_m - qdot_s;
}

Eigen::Vector3d rotation_vector(const Eigen::Quaterniond& q_t) { return so3_log(canonical(q_t)); }

Eigen::MatrixXd damped_pseudoinverse(const Eigen::MatrixXd& j, double damping, bool* singular) {
  if (singular) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& s = svd.singularValues();
    // A wide matrix has min(rows, cols) singular values; rank loss shows as a small last one.
    *singular = s.size() == 0 || s[s.size() - 1] < kSingularityFloor;
  }
  const Eigen::MatrixXd jjt =
      j * j.transpose() +
      damping * damping * Eigen::MatrixXd::Identity(j.rows(), j.rows());
  return j.transpose() * jjt.ldlt().solve(Eigen::MatrixXd::Identity(j.rows(), j.rows()));
}

Eigen::VectorXd project_wrench(const Eigen::MatrixXd& j, const Wrench& wrench) {
  if (j.rows() == 3) return j.transpose() * wrench.torque;
  if (j.rows() == 6) {
    Eigen::Matrix<double, 6, 1> w;
    w << wrench.torque, wrench.force;
    return j.transpose() * w;
  }
  throw ValidationError("wrench projection needs a Jacobian with 3 or 6 rows");
}

namespace {

bool clamp_in_place(Eigen::VectorXd& tau, double limit) {
  bool clamped = false;
  for (auto& t : tau) {
    const double c = std::clamp(t, -limit, limit);
    clamped = clamped || c != t;
    t = c;
  }
  return clamped;
}

}  // namespace

TorqueResult shoulder_impedance_torque(const PoseError& error, const Eigen::MatrixXd& j,
                                       const BindingForce& force, const ImpedanceGains& gains,
                                       double torque_limit) {
  gains.validate();
  const Eigen::Index n = j.cols();
  if ((j.rows() != 3 && j.rows() != 6) || n != 3 || gains.stiffness.size() != n) {
    throw ConfigError("shoulder impedance expects a 3- or 6-row Jacobian over 3 joints and 3 gains");
  }
  const Eigen::MatrixXd j_rot = j.topRows(3);

  TorqueResult out;
  const Eigen::MatrixXd pinv = damped_pseudoinverse(j_rot, kPseudoinverseDamping, &out.singular);
  out.torque = gains.stiffness.asDiagonal() * rotation_vector(error.rotation);
  out.torque += gains.damping.asDiagonal() * (pinv * error.velocity);
  out.torque += gains.lambda * project_wrench(j, force.wrench);
  out.clamped = clamp_in_place(out.torque, torque_limit);
  return out;
}

double joint_impedance_torque(double q_m, double q_s, double qd_m, double qd_s, double tau_ft,
                              const JointGains& gains, double torque_limit) {
  const double tau =
      gains.stiffness * (q_m - q_s) + gains.damping * (qd_m - qd_s) + gains.lambda * tau_ft;
  return std::clamp(tau, -torque_limit, torque_limit);
}

}  // namespace nuexo::ctl
