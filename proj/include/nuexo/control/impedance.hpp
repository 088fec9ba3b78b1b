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

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace nuexo::ctl {

/// Diagonal impedance gains for one tracked subsystem.
struct ImpedanceGains {
  Eigen::VectorXd stiffness;  // N·m/rad
  Eigen::VectorXd damping;    // N·m·s/rad
  double lambda = 0.0;        // force-injection scale

  static ImpedanceGains uniform(Eigen::Index n, double kp, double kd, double lambda);
  void validate() const;
};

/// Scalar gains for the per-joint form (elbow, fingers).
struct JointGains {
  double stiffness = 20.0;
  double damping = 2.0;
  double lambda = 0.1;
};

/// Target of the pose impedance law: q_t = q_s* · q_m and the velocity error.
struct PoseError {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // N
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // N·m
};

/// Interaction force between the user and the exoskeleton cuff.
struct BindingForce {
  Wrench wrench;
  /// Scalar equivalent for the per-joint law.
  double joint_torque = 0.0;
};

struct TorqueResult {
  Eigen::VectorXd torque;
  /// The Jacobian's smallest singular value fell below the singularity floor.
  bool singular = false;
  bool clamped = false;
};

inline constexpr double kPseudoinverseDamping = 1e-4;
inline constexpr double kSingularityFloor = 1e-3;

/// q_t = q_s* · q_m, renormalised and mapped to non-negative scalar part.
/// Throws ValidationError for inputs further than 1e-6 from unit norm.
Eigen::Quaterniond quat_error(const Eigen::Quaterniond& q_s, const Eigen::Quaterniond& q_m);

Eigen::Vector3d velocity_error(const Eigen::Vector3d& qdot_m, const Eigen::Vector3d& qdot_s);

/// Quaternion logarithm (axis × angle) of a canonical unit quaternion.
Eigen::Vector3d rotation_vector(const Eigen::Quaterniond& q_t);

/// Jᵀ(JJᵀ + μ²I)⁻¹. `singular` reports σ_min < kSingularityFloor.
Eigen::MatrixXd damped_pseudoinverse(const Eigen::MatrixXd& j, double damping, bool* singular);

/// Jᵀ·F where J has 3 angular rows (uses the torque) or 6 rows ordered
/// angular then linear (uses torque then force).
Eigen::VectorXd project_wrench(const Eigen::MatrixXd& j, const Wrench& wrench);

/// τ = k_p·log(q_t) + k_d·J⁺·q̇_t + λ·Jᵀ·F_ft, each entry clamped to ±torque_limit.
/// J is 3×3 (or 6×3); the stiffness term acts directly on the rotation vector.
TorqueResult shoulder_impedance_torque(const PoseError& error, const Eigen::MatrixXd& j,
                                       const BindingForce& force, const ImpedanceGains& gains,
                                       double torque_limit);

/// τ = k_p(q_m − q_s) + k_d(q̇_m − q̇_s) + λ·τ_ft, clamped to ±torque_limit.
double joint_impedance_torque(double q_m, double q_s, double qd_m, double qd_s, double tau_ft,
                              const JointGains& gains, double torque_limit);

}  // namespace nuexo::ctl
