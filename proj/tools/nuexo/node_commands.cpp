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


#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "commands.hpp"
#include "nuexo/bus/nodes.hpp"

namespace nuexo::cli {
namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct NodeArgs {
  std::string config;
  std::string endpoint;
  std::string preset;
  std::optional<double> duration;
  // master
  std::string replay;
  std::string trajectory = "sine:0.4:0.5";
  // controller
  std::optional<std::uint16_t> console_port;
  std::string console_dir;
  // follower
  std::uint16_t id = 1;
  std::uint64_t seed = 1;
};

void log_event(const std::string& node, const std::string& text) {
  static std::mutex mutex;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::lock_guard lock(mutex);
  std::cerr << std::put_time(&tm, "%H:%M:%S") << ' ' << node << ": " << text << std::endl;
}

template <typename Options>
Options common(const NodeArgs& a, const std::string& node) {
  Options o;
  o.system = a.config.empty() ? bus::load_system_config(bus::default_config_path()) : bus::load_system_config(a.config);
  if (!a.preset.empty()) o.system.preset = a.preset;
  o.endpoint = a.endpoint.empty() ? o.system.endpoint : a.endpoint;
  o.duration = a.duration;
  if (const char* dir = std::getenv("NUEXO_LOG_DIR"); dir && *dir) o.log_dir = dir;
  o.stop = &g_stop;
  o.on_event = [node](const std::string& text) { log_event(node, text); };
  return o;
}

void print_summary(const std::string& node, const bus::NodeSummary& s) {
  log_event(node, "ticks=" + std::to_string(s.ticks) + " sent=" + std::to_string(s.sent) +
                      " received=" + std::to_string(s.received) + " dropped=" + std::to_string(s.dropped) +
                      " connects=" + std::to_string(s.connects) +
                      " protocol_errors=" + std::to_string(s.protocol_errors));
}

CLI::App* node_command(CLI::App& app, const std::string& name, const std::string& description,
                       const std::shared_ptr<NodeArgs>& a) {
  auto* cmd = app.add_subcommand(name, description);
  cmd->add_option("--config", a->config, "Configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--endpoint", a->endpoint, "host:port of the controller (defaults to node.endpoint)");
  cmd->add_option("--preset", a->preset, "Follower preset name");
  cmd->add_option("--duration", a->duration, "Stop after this many seconds")->check(CLI::PositiveNumber);
  return cmd;
}

void install_signals() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

}  // namespace

void add_node_commands(CLI::App& app) {
  auto a = std::make_shared<NodeArgs>();

  auto* master = node_command(app, "master", "Publish master states to the controller", a);
  master->add_option("--replay", a->replay, "Replay exo-kinematics records from a session log")
      ->check(CLI::ExistingFile);
  master->add_option("--trajectory", a->trajectory, "hold | step:AMP[:JOINT] | sine:AMP:FREQ[:JOINT]");
  master->callback([a] {
    install_signals();
    auto o = common<bus::MasterNodeOptions>(*a, "master");
    o.trajectory = bus::Trajectory::parse(a->trajectory);
    if (!a->replay.empty()) o.replay = a->replay;
    print_summary("master", bus::run_master_node(o));
  });

  auto* controller = node_command(app, "controller", "Run the teleoperation controller", a);
  controller->add_option("--console-port", a->console_port, "Serve the operator console on this port");
  controller->add_option("--console-dir", a->console_dir, "Static console assets");
  controller->callback([a] {
    install_signals();
    auto o = common<bus::ControllerNodeOptions>(*a, "controller");
    o.console_port = a->console_port;
    o.console_dir = a->console_dir.empty() ? std::filesystem::path(NUEXO_CONSOLE_DIR_DEFAULT)
                                           : std::filesystem::path(a->console_dir);
    o.on_listening = [](std::uint16_t bus_port, std::uint16_t console_port) {
      std::cout << "bus port " << bus_port;
      if (console_port != 0) std::cout << ", console at http://127.0.0.1:" << console_port << "/";
      std::cout << std::endl;
    };
    print_summary("controller", bus::run_controller_node(o));
  });

  auto* follower = node_command(app, "follower", "Run a simulated follower arm", a);
  follower->add_option("--id", a->id, "Follower id")->check(CLI::Range(1, 65535));
  follower->add_option("--seed", a->seed, "Encoder noise seed");
  follower->callback([a] {
    install_signals();
    auto o = common<bus::FollowerNodeOptions>(*a, "follower " + std::to_string(a->id));
    o.id = a->id;
    o.seed = a->seed;
    o.model = sim::load_preset(o.system.preset);
    print_summary("follower", bus::run_follower_node(o));
  });
}

}  // namespace nuexo::cli
