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


#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "nuexo/bus/config.hpp"
#include "nuexo/bus/controller.hpp"
#include "nuexo/common/errors.hpp"

namespace nuexo::cli {
namespace {

using nlohmann::json;

template <int N>
Eigen::Matrix<double, N, 1> fixed(const json& j, const char* key, const Eigen::Matrix<double, N, 1>& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != N) throw ConfigError(std::string("'") + key + "' needs " + std::to_string(N) + " values");
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

Eigen::Quaterniond quaternion(const json& j, const char* key) {
  const auto q = fixed<4>(j, key, Eigen::Vector4d(1, 0, 0, 0));
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
}

/// Either the raw 35-float payload or an object with named fields.
bus::MasterState parse_master(const json& j) {
  if (j.is_array()) return bus::MasterState::from_payload(j.get<std::vector<double>>());
  using V6 = Eigen::Matrix<double, 6, 1>;
  bus::MasterState m;
  m.shoulder = quaternion(j, "shoulder");
  m.wrist = quaternion(j, "wrist");
  m.elbow = j.value("elbow", 0.0);
  m.fingers = fixed<6>(j, "fingers", V6::Zero());
  m.shoulder_rate = fixed<3>(j, "shoulder_rate", Eigen::Vector3d::Zero());
  m.wrist_rate = fixed<3>(j, "wrist_rate", Eigen::Vector3d::Zero());
  m.elbow_rate = j.value("elbow_rate", 0.0);
  m.finger_rates = fixed<6>(j, "finger_rates", V6::Zero());
  m.upper_arm_wrench = fixed<6>(j, "upper_arm_wrench", V6::Zero());
  m.elbow_torque = j.value("elbow_torque", 0.0);
  return m;
}

/// Either the raw 34-float payload or {"angles": [...], "velocities": [...]},
/// from which the segment poses are computed.
bus::FollowerReport parse_follower(const json& j, const sim::FollowerModel& model) {
  if (j.is_array()) return bus::FollowerReport::from_payload(j.get<std::vector<double>>());
  using V13 = Eigen::Matrix<double, 13, 1>;
  sim::FollowerState s;
  s.joints.angles = fixed<13>(j, "angles", V13::Zero());
  s.joints.velocities = fixed<13>(j, "velocities", V13::Zero());
  const auto m = sim::measure(s, model);
  bus::FollowerReport r;
  r.angles = m.joints.angles;
  r.velocities = m.joints.velocities;
  r.shoulder = m.shoulder;
  r.wrist = m.wrist;
  return r;
}

struct StepArgs {
  std::string config;
  std::string preset;
};

}  // namespace

void add_ctl_commands(CLI::App& app) {
  auto* ctl = app.add_subcommand("ctl", "Teleoperation controller");
  ctl->require_subcommand(1);
  auto args = std::make_shared<StepArgs>();
  auto* step = ctl->add_subcommand(
      "step", "Run one controller tick per JSON line on stdin: {\"master\": ..., \"followers\": {\"ID\": ...}}");
  step->add_option("--config", args->config, "Configuration file")->check(CLI::ExistingFile);
  step->add_option("--preset", args->preset, "Follower preset (defaults to the configured one)");
  step->callback([args] {
    const auto system = args->config.empty() ? bus::load_system_config(bus::default_config_path())
                                             : bus::load_system_config(args->config);
    const auto model = sim::load_preset(args->preset.empty() ? system.preset : args->preset);
    bus::Controller controller(system.controller);
    for (auto id : system.followers) controller.add_follower(id, model);

    std::string line;
    std::size_t number = 0;
    while (std::getline(std::cin, line)) {
      ++number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto in = json::parse(line);
        if (in.contains("master")) controller.on_master(parse_master(in.at("master")));
        if (in.contains("followers")) {
          for (const auto& [key, value] : in.at("followers").items()) {
            controller.on_follower(static_cast<std::uint16_t>(std::stoul(key)), parse_follower(value, model));
          }
        }
      } catch (const std::exception& e) {
        throw ConfigError("stdin line " + std::to_string(number) + ": " + e.what());
      }
      const auto result = controller.tick();
      json out{{"tick", result.tick}, {"commands", json::array()}, {"events", json::array()}};
      for (const auto& c : result.commands) out["commands"].push_back({{"follower", c.follower_id}, {"torque", c.torque}});
      for (const auto& e : result.events) {
        out["events"].push_back({{"tick", e.tick},
                                 {"source", e.master ? "master" : "follower"},
                                 {"follower", e.follower_id},
                                 {"stale", e.stale}});
      }
      std::cout << out.dump() << '\n';
    }
  });
}

}  // namespace nuexo::cli
