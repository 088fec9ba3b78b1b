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


#include "nuexo/bus/loopback.hpp"

#include <algorithm>
#include <cmath>

#include "nuexo/bus/wire.hpp"
#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"

namespace nuexo::bus {
namespace {

constexpr double kSubstep = 0.001;  // s

WireMessage pass_through(const WireMessage& m, StreamDecoder& decoder) {
  decoder.feed(encode_message(m));
  auto out = decoder.next();
  if (!out) throw ProtocolError(ProtocolError::Kind::bad_length, "loopback frame incomplete");
  return std::move(*out);
}

std::vector<double> tagged(std::uint16_t id, const std::vector<double>& payload) {
  std::vector<double> out{static_cast<double>(id)};
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

}  // namespace

SimulatedFollower::SimulatedFollower(std::uint16_t id, sim::FollowerModel model, std::uint64_t seed,
                                     std::uint64_t hold_ticks)
    : id_(id),
      model_(std::move(model)),
      rng_(seed),
      command_(Eigen::VectorXd::Zero(sim::kFollowerJoints)),
      hold_ticks_(hold_ticks) {
  model_.validate();
}

FollowerReport SimulatedFollower::report() {
  const auto m = sim::measure(state_, model_, &rng_);
  FollowerReport r;
  r.angles = m.joints.angles;
  r.velocities = m.joints.velocities;
  r.shoulder = m.shoulder;
  r.wrist = m.wrist;
  return r;
}

void SimulatedFollower::command(const std::vector<double>& torque, std::uint64_t tick) {
  if (torque.size() != static_cast<std::size_t>(sim::kFollowerJoints)) {
    throw ProtocolError(ProtocolError::Kind::bad_length, "TorqueCmd needs 13 values");
  }
  command_ = Eigen::Map<const Eigen::VectorXd>(torque.data(), sim::kFollowerJoints);
  command_tick_ = tick;
}

void SimulatedFollower::advance(double period, std::uint64_t tick) {
  const bool fresh = command_tick_ && tick - *command_tick_ <= hold_ticks_;
  const Eigen::VectorXd base = fresh ? command_ : Eigen::VectorXd::Zero(sim::kFollowerJoints);
  const int substeps = std::max(1, static_cast<int>(std::lround(period / kSubstep)));
  const double dt = period / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Eigen::VectorXd tau = base + model_.gravity_load(state_.joints.angles);
    state_ = sim::step(state_, tau, dt, model_);
  }
}

log::ImuSample SyntheticImu::sample() {
  std::normal_distribution<double> accel(0.0, 0.02), gyro(0.0, 0.001);
  log::ImuSample s;
  s.accel += Eigen::Vector3d(accel(rng_), accel(rng_), accel(rng_));
  s.gyro = Eigen::Vector3d(gyro(rng_), gyro(rng_), gyro(rng_));
  return s;
}

std::unique_ptr<log::LogWriter> open_session_log(const std::filesystem::path& path,
                                                 const std::vector<std::uint16_t>& streams) {
  std::vector<log::StreamInfo> infos;
  for (auto id : streams) infos.push_back(log::standard_stream(id));
  return std::make_unique<log::LogWriter>(path, std::move(infos));
}

LoopbackResult run_loopback(const LoopbackOptions& opt) {
  opt.system.validate();
  if (opt.followers.empty()) throw ConfigError("loopback session needs at least one follower");

  const double period = 1.0 / opt.system.tick_rate;
  const std::uint64_t tick_us = opt.system.tick_us();
  const auto ticks = static_cast<std::uint64_t>(std::llround(opt.duration * opt.system.tick_rate));

  ExoMaster master(opt.system.exo, period);
  Controller controller(opt.system.controller);
  std::vector<SimulatedFollower> followers;
  std::vector<StreamDecoder> follower_rx(opt.followers.size());
  StreamDecoder controller_rx;
  LoopbackResult result;
  for (std::size_t i = 0; i < opt.followers.size(); ++i) {
    const auto& [id, model] = opt.followers[i];
    controller.add_follower(id, model);
    followers.emplace_back(id, model, opt.seed * 1000003u + id, opt.system.controller.stale_ticks);
    result.followers.push_back(FollowerTrace{id, {}, {}, 0, {}});
  }
  SyntheticImu imu(opt.seed);
  log::OdometryState odometry;

  std::unique_ptr<log::LogWriter> session_log, command_log;
  if (opt.log_path) {
    session_log = open_session_log(*opt.log_path, {log::kTeleopCmd, log::kExoKinematics, log::kFinger,
                                                   log::kOdometry, log::kBindingForce, log::kFollowerState});
  }
  if (opt.command_log_path) command_log = open_session_log(*opt.command_log_path, {log::kTeleopCmd});

  for (std::uint64_t k = 0; k < ticks; ++k) {
    const std::uint64_t ts = k * tick_us;
    const double t = static_cast<double>(k) * period;

    const MasterSample sample = master.update(opt.trajectory.angles(t), opt.trajectory.fingers(t));
    const WireMessage master_msg{MsgType::MasterState, kMasterStream, ts, sample.state.to_payload()};
    controller.on_master(MasterState::from_payload(pass_through(master_msg, controller_rx).payload));

    std::vector<std::pair<std::uint16_t, std::vector<double>>> reports;
    for (auto& f : followers) {
      const auto report = f.report();
      if (opt.follower_silent && opt.follower_silent(f.id(), k)) continue;
      const WireMessage msg{MsgType::FollowerState, f.id(), ts, report.to_payload()};
      const auto received = pass_through(msg, controller_rx);
      controller.on_follower(received.stream_id, FollowerReport::from_payload(received.payload));
      reports.emplace_back(f.id(), received.payload);
    }

    const TickResult tick = controller.tick();
    result.events.insert(result.events.end(), tick.events.begin(), tick.events.end());
    for (const auto& cmd : tick.commands) {
      const auto slot = static_cast<std::size_t>(
          std::find_if(followers.begin(), followers.end(), [&](const auto& f) { return f.id() == cmd.follower_id; }) -
          followers.begin());
      const WireMessage msg{MsgType::TorqueCmd, cmd.follower_id, ts, cmd.torque};
      const auto received = pass_through(msg, follower_rx[slot]);
      followers[slot].command(received.payload, k);
      auto& trace = result.followers[slot];
      const auto* bytes = reinterpret_cast<const std::uint8_t*>(received.payload.data());
      trace.command_bytes.insert(trace.command_bytes.end(), bytes, bytes + received.payload.size() * 8);
      ++trace.commands;
      const auto record = tagged(cmd.follower_id, received.payload);
      if (session_log) session_log->append(log::kTeleopCmd, ts, record);
      if (command_log) command_log->append(log::kTeleopCmd, ts, record);
    }

    odometry = log::odometry_step(odometry, imu.sample(), period);
    if (session_log) {
      session_log->append(log::kExoKinematics, ts, sample.kinematics_payload());
      session_log->append(log::kFinger, ts, sample.finger_payload());
      session_log->append(log::kOdometry, ts, odometry.to_payload());
      session_log->append(log::kBindingForce, ts, sample.binding_payload());
      for (const auto& [id, payload] : reports) session_log->append(log::kFollowerState, ts, tagged(id, payload));
    }

    for (std::size_t i = 0; i < followers.size(); ++i) {
      followers[i].advance(period, k);
      const auto pose = sim::shoulder_pose(followers[i].model(), followers[i].state().joints.angles);
      result.followers[i].shoulder_error.push_back(angle_between(pose, sample.state.shoulder));
    }
    result.times.push_back(t + period);
  }

  for (std::size_t i = 0; i < followers.size(); ++i) result.followers[i].final_state = followers[i].state();
  result.ticks = ticks;
  if (session_log) session_log->close();
  if (command_log) command_log->close();
  return result;
}

std::size_t replay_session(const log::LogFile& session, const SystemConfig& system,
                           const std::vector<std::pair<std::uint16_t, sim::FollowerModel>>& followers,
                           const std::filesystem::path& command_log) {
  Controller controller(system.controller);
  for (const auto& [id, model] : followers) controller.add_follower(id, model);
  auto out = open_session_log(command_log, {log::kTeleopCmd});

  const auto records = log::replay_order(session);
  std::size_t written = 0;
  for (std::size_t i = 0; i < records.size();) {
    const std::uint64_t ts = records[i].timestamp_us;
    bool any_input = false;
    for (; i < records.size() && records[i].timestamp_us == ts; ++i) {
      const auto& r = records[i];
      if (r.stream_id == log::kExoKinematics) {
        controller.on_master(MasterState::from_payload(
            std::vector<double>(r.payload.begin(), r.payload.begin() + MasterState::kSize)));
        any_input = true;
      } else if (r.stream_id == log::kFollowerState) {
        const auto id = static_cast<std::uint16_t>(r.payload.front());
        controller.on_follower(id, FollowerReport::from_payload(std::vector<double>(r.payload.begin() + 1, r.payload.end())));
        any_input = true;
      }
    }
    if (!any_input) continue;
    for (const auto& cmd : controller.tick().commands) {
      out->append(log::kTeleopCmd, ts, tagged(cmd.follower_id, cmd.torque));
      ++written;
    }
  }
  out->close();
  return written;
}

}  // namespace nuexo::bus
