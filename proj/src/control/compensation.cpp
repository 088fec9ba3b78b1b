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

#include "nuexo/control/compensation.hpp"

#include <cmath>

#include "nuexo/common/errors.hpp"

namespace nuexo::ctl {

CompensationModel CompensationModel::zeros(Eigen::Index n) {
  CompensationModel m;
  m.inertia = Eigen::MatrixXd::Identity(n, n);
  m.coriolis = Eigen::MatrixXd::Zero(n, n);
  m.link_mass = Eigen::VectorXd::Zero(n);
  m.link_lever = Eigen::VectorXd::Zero(n);
  m.gravity_phase = Eigen::VectorXd::Zero(n);
  m.viscous = Eigen::VectorXd::Zero(n);
  m.coulomb = Eigen::VectorXd::Zero(n);
  return m;
}

void CompensationModel::validate() const {
  const Eigen::Index n = inertia.rows();
  if (inertia.cols() != n || coriolis.rows() != n || coriolis.cols() != n || link_mass.size() != n ||
      link_lever.size() != n || gravity_phase.size() != n || viscous.size() != n ||
      coulomb.size() != n) {
    throw ConfigError("compensation model: inconsistent dimensions");
  }
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) {
    throw ConfigError("compensation model: inertia is not symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(inertia).info() != Eigen::Success) {
    throw ConfigError("compensation model: inertia is not positive definite");
  }
  if ((viscous.array() < 0.0).any() || (coulomb.array() < 0.0).any() || !(coulomb_epsilon > 0.0)) {
    throw ConfigError("compensation model: friction coefficients must be non-negative");
  }
}

Eigen::VectorXd dynamics_compensation(const kin::JointConfig& state, const Eigen::VectorXd& accel_ref,
                                      const CompensationModel& model) {
  model.validate();
  state.validate();
  const Eigen::Index n = model.size();
  if (state.size() != n || accel_ref.size() != n) {
    throw ConfigError("dynamics compensation: state size does not match the model");
  }
  const Eigen::ArrayXd qd = state.velocities.array();
  Eigen::VectorXd tau = model.inertia * accel_ref;
  tau += model.coriolis * (qd * qd).matrix();
  tau += (model.link_mass.array() * model.gravity * model.link_lever.array() *
          (state.angles.array() + model.gravity_phase.array()).cos())
             .matrix();
  tau += (model.viscous.array() * qd +
          model.coulomb.array() * (qd / model.coulomb_epsilon).tanh())
             .matrix();
  return tau;
}

Eigen::VectorXd fcm_assist(std::span<const BindingTerm> bindings, double scale) {
  if (bindings.empty()) return {};
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(bindings.front().jacobian.cols());
  for (const auto& b : bindings) {
    if (b.jacobian.cols() != tau.size()) throw ValidationError("binding Jacobians differ in width");
    if (!b.wrench.force.allFinite() || !b.wrench.torque.allFinite()) {
      throw ValidationError("binding wrench is not finite");
    }
    tau += project_wrench(b.jacobian, b.wrench);
  }
  return scale * tau;
}

Eigen::VectorXd exo_command(const Eigen::VectorXd& tau_com, const Eigen::VectorXd& tau_h,
                            const Eigen::VectorXd& limits) {
  if (tau_com.size() != tau_h.size() || limits.size() != tau_com.size()) {
    throw ValidationError("exo command: torque vectors differ in length");
  }
  return (tau_com + tau_h).cwiseMax(-limits).cwiseMin(limits);
}

}  // namespace nuexo::ctl
