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

#include <span>

#include <Eigen/Dense>

#include "nuexo/control/impedance.hpp"
#include "nuexo/kinematics/types.hpp"

namespace nuexo::ctl {

/// Identified exoskeleton dynamics used for feed-forward compensation:
///   τ_com = M̂·q̈_ref + ĥ(q̇) + ĝ(q) + f̂(q̇)
/// with ĥ_i = Σ_j C_ij·q̇_j², ĝ_i = m_i·g·r_i·cos(q_i + φ_i) (one point mass per
/// link) and f̂_i = b_i·q̇_i + μ_i·tanh(q̇_i/ε).
struct CompensationModel {
  Eigen::MatrixXd inertia;
  Eigen::MatrixXd coriolis;
  Eigen::VectorXd link_mass;
  Eigen::VectorXd link_lever;
  Eigen::VectorXd gravity_phase;
  double gravity = 9.81;
  Eigen::VectorXd viscous;
  Eigen::VectorXd coulomb;
  double coulomb_epsilon = 0.01;

  /// Zero dynamics of size n with identity inertia; callers fill what they need.
  static CompensationModel zeros(Eigen::Index n);
  Eigen::Index size() const { return inertia.rows(); }
  /// Throws ConfigError unless M̂ is symmetric positive definite, sizes agree and
  /// friction coefficients are non-negative.
  void validate() const;
};

Eigen::VectorXd dynamics_compensation(const kin::JointConfig& state, const Eigen::VectorXd& accel_ref,
                                      const CompensationModel& model);

/// One binding cuff: its Jacobian (3 angular rows or 6 rows angular/linear) and
/// the measured wrench.
struct BindingTerm {
  Eigen::MatrixXd jacobian;
  Wrench wrench;
};

/// Coordination assist τ_h = scale · Σ Jᵀ·F over the binding cuffs.
Eigen::VectorXd fcm_assist(std::span<const BindingTerm> bindings, double scale);

/// τ_cmd = τ_com + τ_h, each entry clamped to ±limits[i].
/// Throws ValidationError on length mismatch.
Eigen::VectorXd exo_command(const Eigen::VectorXd& tau_com, const Eigen::VectorXd& tau_h,
                            const Eigen::VectorXd& limits);

}  // namespace nuexo::ctl
