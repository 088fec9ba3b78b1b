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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nuexo/common/config_file.hpp"
#include "nuexo/control/compensation.hpp"
#include "nuexo/control/impedance.hpp"
#include "nuexo/control/tremor_filter.hpp"
#include "nuexo/kinematics/exo_chain.hpp"
#include "nuexo/kinematics/types.hpp"

namespace nuexo::bus {

struct ControllerConfig {
  ctl::ImpedanceGains shoulder = ctl::ImpedanceGains::uniform(3, 20.0, 2.0, 0.1);
  ctl::ImpedanceGains wrist = ctl::ImpedanceGains::uniform(3, 20.0, 2.0, 0.1);
  ctl::JointGains elbow;
  ctl::JointGains fingers;
  double shoulder_limit = 30.0;  // N·m
  double elbow_limit = 15.0;
  double wrist_limit = 15.0;
  double finger_limit = 1.0;
  ctl::TremorFilterState tremor;  // thresholds only; the controller owns the running state
  /// A follower or master silent for more ticks than this is stale.
  std::uint64_t stale_ticks = 5;

  void validate() const;
};

/// Exoskeleton description used by the master node.
struct ExoModel {
  kin::ShoulderCoupling coupling;
  kin::ExoGeometry geometry;
  kin::RomLimits rom = kin::RomLimits::shoulder_defaults();
  ctl::CompensationModel dynamics = default_dynamics();
  double fcm_scale = 1.0;
  Eigen::VectorXd torque_limits = Eigen::VectorXd::Constant(kin::kExoActiveJoints, 10.0);

  static ctl::CompensationModel default_dynamics();
  void validate() const;
};

struct SystemConfig {
  ExoModel exo;
  ControllerConfig controller;
  double tick_rate = 500.0;  // Hz, controller and simulator
  std::string endpoint = "127.0.0.1:47000";
  std::vector<std::uint16_t> followers{1};
  std::string preset = "light";

  std::uint64_t tick_us() const;
  /// Throws ConfigError on out-of-range values (tick rate outside [50, 1000] Hz).
  void validate() const;
};

/// Every key is optional; absent keys keep the defaults above. Angles in rad.
SystemConfig system_config(const ConfigFile& cfg);
SystemConfig load_system_config(const std::filesystem::path& path);
/// config/nuexo.cfg of the source tree.
std::filesystem::path default_config_path();

}  // namespace nuexo::bus
