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


#include "nuexo/bus/config.hpp"

#include <cmath>
#include <set>

#include "nuexo/common/errors.hpp"

#ifndef NUEXO_CONFIG_DEFAULT
#define NUEXO_CONFIG_DEFAULT "config/nuexo.cfg"
#endif

namespace nuexo::bus {
namespace {

Eigen::VectorXd vector_or(const ConfigFile& cfg, const std::string& key, const Eigen::VectorXd& fallback) {
  if (!cfg.has(key)) return fallback;
  auto v = cfg.get_doubles(key);
  if (v.size() == 1) v.assign(static_cast<std::size_t>(fallback.size()), v.front());
  if (v.size() != static_cast<std::size_t>(fallback.size())) {
    cfg.fail(key, "expected 1 or " + std::to_string(fallback.size()) + " values");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), fallback.size());
}

void read_gains(const ConfigFile& cfg, const std::string& prefix, ctl::ImpedanceGains& g) {
  g.stiffness = vector_or(cfg, prefix + "kp", g.stiffness);
  g.damping = vector_or(cfg, prefix + "kd", g.damping);
  g.lambda = cfg.get_double_or(prefix + "lambda", g.lambda);
}

void read_gains(const ConfigFile& cfg, const std::string& prefix, ctl::JointGains& g) {
  g.stiffness = cfg.get_double_or(prefix + "kp", g.stiffness);
  g.damping = cfg.get_double_or(prefix + "kd", g.damping);
  g.lambda = cfg.get_double_or(prefix + "lambda", g.lambda);
}

}  // namespace

void ControllerConfig::validate() const {
  shoulder.validate();
  wrist.validate();
  if (shoulder.stiffness.size() != 3 || wrist.stiffness.size() != 3) {
    throw ConfigError("shoulder and wrist gains need three entries");
  }
  for (const auto* g : {&elbow, &fingers}) {
    if (!(g->stiffness >= 0.0 && g->damping >= 0.0 && std::isfinite(g->lambda))) {
      throw ConfigError("joint gains must be non-negative");
    }
  }
  for (double l : {shoulder_limit, elbow_limit, wrist_limit, finger_limit}) {
    if (!(l > 0.0)) throw ConfigError("torque limits must be positive");
  }
  tremor.validate();
  if (stale_ticks == 0) throw ConfigError("stale_ticks must be at least 1");
}

ctl::CompensationModel ExoModel::default_dynamics() {
  auto m = ctl::CompensationModel::zeros(kin::kExoActiveJoints);
  m.inertia.diagonal() << 0.06, 0.05, 0.02, 0.02, 0.004;
  m.link_mass << 0.0, 0.0, 0.0, 1.1, 0.4;
  m.link_lever << 0.0, 0.0, 0.0, 0.12, 0.05;
  m.viscous.setConstant(0.02);
  m.coulomb.setConstant(0.05);
  return m;
}

void ExoModel::validate() const {
  coupling.validate();
  rom.validate();
  dynamics.validate();
  if (dynamics.size() != kin::kExoActiveJoints || torque_limits.size() != kin::kExoActiveJoints) {
    throw ConfigError("exoskeleton model needs five joints");
  }
  if ((torque_limits.array() <= 0.0).any()) throw ConfigError("exoskeleton torque limits must be positive");
}

std::uint64_t SystemConfig::tick_us() const {
  return static_cast<std::uint64_t>(std::llround(1e6 / tick_rate));
}

void SystemConfig::validate() const {
  exo.validate();
  controller.validate();
  if (!(tick_rate >= 50.0 && tick_rate <= 1000.0)) throw ConfigError("tick rate must lie in [50, 1000] Hz");
  if (followers.empty()) throw ConfigError("at least one follower id is required");
  if (std::set<std::uint16_t>(followers.begin(), followers.end()).size() != followers.size()) {
    throw ConfigError("follower ids must be unique");
  }
}

SystemConfig system_config(const ConfigFile& cfg) {
  std::set<std::string> allowed{
      "coupling.link1", "coupling.link2", "coupling.theta_e", "coupling.gain", "coupling.offset",
      "exo.upper_arm", "exo.forearm", "exo.hand", "exo.gh_vertical_offset", "exo.inertia",
      "exo.link_mass", "exo.link_lever", "exo.gravity_phase", "exo.viscous", "exo.coulomb",
      "exo.torque_limit", "exo.fcm_scale", "limits.shoulder", "limits.elbow", "limits.wrist",
      "limits.fingers", "tremor.deadband", "tremor.hysteresis_exit", "tremor.settle_samples",
      "node.tick_rate", "node.endpoint", "node.followers", "node.preset", "node.stale_ticks"};
  for (const char* group : {"shoulder", "wrist", "elbow", "fingers"}) {
    for (const char* k : {"kp", "kd", "lambda"}) allowed.insert(std::string("gains.") + group + "." + k);
  }
  SystemConfig s;
  for (const auto& axis : s.exo.rom.axes) {
    allowed.insert("rom." + axis.name + ".min");
    allowed.insert("rom." + axis.name + ".max");
  }
  cfg.reject_unknown(allowed);

  auto& c = s.exo.coupling;
  c.link1 = cfg.get_double_or("coupling.link1", c.link1);
  c.link2 = cfg.get_double_or("coupling.link2", c.link2);
  c.theta_e = cfg.get_double_or("coupling.theta_e", c.theta_e);
  c.gain = cfg.get_double_or("coupling.gain", c.gain);
  c.offset = cfg.get_double_or("coupling.offset", c.offset);

  auto& g = s.exo.geometry;
  g.upper_arm = cfg.get_double_or("exo.upper_arm", g.upper_arm);
  g.forearm = cfg.get_double_or("exo.forearm", g.forearm);
  g.hand = cfg.get_double_or("exo.hand", g.hand);
  g.gh_vertical_offset = cfg.get_double_or("exo.gh_vertical_offset", g.gh_vertical_offset);

  auto& d = s.exo.dynamics;
  if (cfg.has("exo.inertia")) {
    d.inertia = vector_or(cfg, "exo.inertia", d.inertia.diagonal()).asDiagonal();
  }
  d.link_mass = vector_or(cfg, "exo.link_mass", d.link_mass);
  d.link_lever = vector_or(cfg, "exo.link_lever", d.link_lever);
  d.gravity_phase = vector_or(cfg, "exo.gravity_phase", d.gravity_phase);
  d.viscous = vector_or(cfg, "exo.viscous", d.viscous);
  d.coulomb = vector_or(cfg, "exo.coulomb", d.coulomb);
  s.exo.torque_limits = vector_or(cfg, "exo.torque_limit", s.exo.torque_limits);
  s.exo.fcm_scale = cfg.get_double_or("exo.fcm_scale", s.exo.fcm_scale);
  for (auto& axis : s.exo.rom.axes) {
    axis.min = cfg.get_double_or("rom." + axis.name + ".min", axis.min);
    axis.max = cfg.get_double_or("rom." + axis.name + ".max", axis.max);
  }

  auto& k = s.controller;
  read_gains(cfg, "gains.shoulder.", k.shoulder);
  read_gains(cfg, "gains.wrist.", k.wrist);
  read_gains(cfg, "gains.elbow.", k.elbow);
  read_gains(cfg, "gains.fingers.", k.fingers);
  k.shoulder_limit = cfg.get_double_or("limits.shoulder", k.shoulder_limit);
  k.elbow_limit = cfg.get_double_or("limits.elbow", k.elbow_limit);
  k.wrist_limit = cfg.get_double_or("limits.wrist", k.wrist_limit);
  k.finger_limit = cfg.get_double_or("limits.fingers", k.finger_limit);
  k.tremor.deadband = cfg.get_double_or("tremor.deadband", k.tremor.deadband);
  k.tremor.hysteresis_exit = cfg.get_double_or("tremor.hysteresis_exit", k.tremor.hysteresis_exit);
  const double settle = cfg.get_double_or("tremor.settle_samples", static_cast<double>(k.tremor.settle_samples));
  if (settle < 1 || settle != std::floor(settle)) cfg.fail("tremor.settle_samples", "must be a positive integer");
  k.tremor.settle_samples = static_cast<std::size_t>(settle);
  const double stale = cfg.get_double_or("node.stale_ticks", static_cast<double>(k.stale_ticks));
  if (stale < 1 || stale != std::floor(stale)) cfg.fail("node.stale_ticks", "must be a positive integer");
  k.stale_ticks = static_cast<std::uint64_t>(stale);

  s.tick_rate = cfg.get_double_or("node.tick_rate", s.tick_rate);
  if (cfg.has("node.tick_rate") && !(s.tick_rate >= 50.0 && s.tick_rate <= 1000.0)) {
    cfg.fail("node.tick_rate", "must lie in [50, 1000] Hz");
  }
  s.endpoint = cfg.get_string_or("node.endpoint", s.endpoint);
  s.preset = cfg.get_string_or("node.preset", s.preset);
  if (cfg.has("node.followers")) {
    s.followers.clear();
    for (double id : cfg.get_doubles("node.followers")) {
      if (id < 1 || id > 65534 || id != std::floor(id)) cfg.fail("node.followers", "ids must be integers in [1, 65534]");
      s.followers.push_back(static_cast<std::uint16_t>(id));
    }
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  return s;
}

SystemConfig load_system_config(const std::filesystem::path& path) {
  return system_config(ConfigFile::load(path));
}

std::filesystem::path default_config_path() { return NUEXO_CONFIG_DEFAULT; }

}  // namespace nuexo::bus
