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

#include "nuexo/follower/follower.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <cstdlib>
#include <numbers>

#include <nlohmann/json.hpp>

#include "nuexo/common/errors.hpp"
#include "nuexo/kinematics/kinematics.hpp"

#ifndef NUEXO_PRESET_DIR_DEFAULT
#define NUEXO_PRESET_DIR_DEFAULT "presets"
#endif

namespace nuexo::sim {
namespace {

constexpr double kPi = std::numbers::pi;

struct Group {
  const char* name;
  Eigen::Index first;
  Eigen::Index count;
};

constexpr Group kGroups[] = {
    {"shoulder", kShoulder0, 3},
    {"elbow", kElbowJoint, 1},
    {"wrist", kWrist0, 3},
    {"fingers", kFinger0, kFingerJoints},
};

kin::JointConfig chain_config(const Eigen::VectorXd& q) {
  return kin::JointConfig(q.head(kChainJoints));
}

}  // namespace

std::vector<kin::DHLink> follower_chain(const FollowerGeometry& g) {
  using kin::DHLink;
  return {
      DHLink::active(0.0, 0.0, 0.0, kPi / 2),
      DHLink::active(kPi / 2, 0.0, 0.0, kPi / 2),
      DHLink::active(0.0, g.upper_arm, 0.0, -kPi / 2),
      DHLink::active(0.0, 0.0, 0.0, kPi / 2),
      DHLink::active(0.0, g.forearm, 0.0, -kPi / 2),
      DHLink::active(-kPi / 2, 0.0, 0.0, kPi / 2),
      DHLink::active(0.0, g.hand, 0.0, 0.0),
  };
}

void finalize_model(FollowerModel& model) {
  model.chain = follower_chain(model.geometry);
  const kin::ShoulderCoupling unused;
  model.shoulder = kin::make_segment(model.chain, unused, -1, 2, 0, 2);
  model.wrist = kin::make_segment(model.chain, unused, 3, 6, 4, 6);
}

void FollowerModel::validate() const {
  if (joints.size() != static_cast<std::size_t>(kFollowerJoints)) {
    throw ConfigError("follower model '" + name + "' needs " + std::to_string(kFollowerJoints) +
                      " joints");
  }
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto& j = joints[i];
    const std::string where = "follower model '" + name + "' joint " + std::to_string(i) + ": ";
    if (!(j.inertia > 0.0)) throw ConfigError(where + "inertia must be positive");
    if (!(j.damping >= 0.0)) throw ConfigError(where + "damping must be non-negative");
    if (!(j.torque_limit > 0.0)) throw ConfigError(where + "torque limit must be positive");
    if (!(j.angle_min < j.angle_max)) throw ConfigError(where + "angle_min must be below angle_max");
    if (!std::isfinite(j.gravity_torque)) throw ConfigError(where + "gravity torque must be finite");
  }
  if (!(encoder_noise >= 0.0)) throw ConfigError("encoder noise must be non-negative");
  if (chain.size() != static_cast<std::size_t>(kChainJoints)) {
    throw ConfigError("follower model '" + name + "' has no kinematic chain");
  }
}

Eigen::VectorXd FollowerModel::torque_limits() const {
  Eigen::VectorXd l(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t i = 0; i < joints.size(); ++i) l[static_cast<Eigen::Index>(i)] = joints[i].torque_limit;
  return l;
}

Eigen::VectorXd FollowerModel::gravity_load(const Eigen::VectorXd& q) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(q.size());
  if (!gravity) return g;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    g[i] = joints[static_cast<std::size_t>(i)].gravity_torque * std::cos(q[i]);
  }
  return g;
}

FollowerModel make_model(const ConfigFile& cfg) {
  std::set<std::string> allowed{"name", "gravity", "encoder_noise", "geometry.upper_arm",
                                "geometry.forearm", "geometry.hand"};
  static constexpr const char* kFields[] = {"inertia", "damping", "torque_limit", "angle_min",
                                            "angle_max", "gravity_torque"};
  for (const auto& g : kGroups) {
    for (const char* f : kFields) allowed.insert(std::string(g.name) + "." + f);
  }
  cfg.reject_unknown(allowed);

  FollowerModel m;
  m.name = cfg.get_string_or("name", cfg.source());
  m.gravity = cfg.get_bool_or("gravity", false);
  m.encoder_noise = cfg.get_double_or("encoder_noise", 0.0);
  if (m.encoder_noise < 0.0) cfg.fail("encoder_noise", "must be non-negative");
  m.geometry.upper_arm = cfg.get_double_or("geometry.upper_arm", m.geometry.upper_arm);
  m.geometry.forearm = cfg.get_double_or("geometry.forearm", m.geometry.forearm);
  m.geometry.hand = cfg.get_double_or("geometry.hand", m.geometry.hand);
  m.joints.resize(kFollowerJoints);

  for (const auto& g : kGroups) {
    auto read = [&](const char* field, bool required, auto check, const char* rule) {
      const std::string key = std::string(g.name) + "." + field;
      std::vector<double> v(static_cast<std::size_t>(g.count), 0.0);
      if (cfg.has(key)) {
        v = cfg.get_doubles(key);
        if (v.size() == 1) v.assign(static_cast<std::size_t>(g.count), v.front());
        if (v.size() != static_cast<std::size_t>(g.count)) {
          cfg.fail(key, "expected 1 or " + std::to_string(g.count) + " values");
        }
        for (double x : v) {
          if (!check(x)) cfg.fail(key, rule);
        }
      } else if (required) {
        throw ConfigError(cfg.source() + ": missing required key '" + key + "'");
      }
      return v;
    };
    const auto inertia = read("inertia", true, [](double x) { return x > 0; }, "must be positive");
    const auto damping = read("damping", true, [](double x) { return x >= 0; }, "must be non-negative");
    const auto limit = read("torque_limit", true, [](double x) { return x > 0; }, "must be positive");
    const auto lo = read("angle_min", true, [](double) { return true; }, "");
    const auto hi = read("angle_max", true, [](double) { return true; }, "");
    const auto grav = read("gravity_torque", false, [](double) { return true; }, "");
    for (Eigen::Index k = 0; k < g.count; ++k) {
      const auto s = static_cast<std::size_t>(k);
      if (!(lo[s] < hi[s])) cfg.fail(std::string(g.name) + ".angle_max", "must exceed angle_min");
      m.joints[static_cast<std::size_t>(g.first + k)] =
          FollowerJoint{inertia[s], damping[s], limit[s], lo[s], hi[s], grav[s]};
    }
  }
  finalize_model(m);
  m.validate();
  return m;
}

FollowerModel load_model(const std::filesystem::path& path) {
  return make_model(ConfigFile::load(path));
}

std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("NUEXO_PRESET_DIR"); env && *env) return env;
  return NUEXO_PRESET_DIR_DEFAULT;
}

FollowerModel load_preset(const std::string& name) {
  const auto path = preset_directory() / (name + ".cfg");
  if (!std::filesystem::exists(path)) throw ConfigError("unknown follower preset '" + name + "' (" + path.string() + ")");
  return load_model(path);
}

FollowerState step(const FollowerState& state, const Eigen::VectorXd& tau, double dt,
                   const FollowerModel& model) {
  if (!(dt > 0.0) || dt > 0.01) throw ValidationError("follower step needs dt in (0, 0.01] s");
  if (tau.size() != kFollowerJoints) throw ValidationError("torque vector has wrong length");
  if (!tau.allFinite()) throw ValidationError("torque command is not finite");

  FollowerState next = state;
  next.applied_torque = tau.cwiseMax(-model.torque_limits()).cwiseMin(model.torque_limits());
  const Eigen::VectorXd load = model.gravity_load(state.joints.angles);
  for (Eigen::Index i = 0; i < kFollowerJoints; ++i) {
    const auto& j = model.joints[static_cast<std::size_t>(i)];
    double& q = next.joints.angles[i];
    double& qd = next.joints.velocities[i];
    const double qdd = (next.applied_torque[i] - j.damping * qd - load[i]) / j.inertia;
    qd += qdd * dt;
    q += qd * dt;
    if (q < j.angle_min || q > j.angle_max) {
      q = std::clamp(q, j.angle_min, j.angle_max);
      qd = 0.0;
    }
  }
  next.time = state.time + dt;
  return next;
}

Eigen::Quaterniond shoulder_pose(const FollowerModel& model, const Eigen::VectorXd& q) {
  const auto frames = kin::forward_kinematics(chain_config(q), model.chain, kin::ShoulderCoupling{});
  return kin::segment_pose(frames, model.shoulder);
}

Eigen::Quaterniond wrist_pose(const FollowerModel& model, const Eigen::VectorXd& q) {
  const auto frames = kin::forward_kinematics(chain_config(q), model.chain, kin::ShoulderCoupling{});
  return kin::segment_pose(frames, model.wrist);
}

namespace {

Eigen::Matrix3d body_jacobian(const FollowerModel& model, const Eigen::VectorXd& q,
                              const kin::Segment& segment, Eigen::Index first) {
  const auto config = chain_config(q);
  const kin::ShoulderCoupling unused;
  const auto frames = kin::forward_kinematics(config, model.chain, unused);
  const Eigen::Matrix3d pose = kin::segment_pose(frames, segment).toRotationMatrix();
  const Eigen::Matrix3Xd spatial = kin::segment_jacobian(config, model.chain, unused, segment);
  return pose.transpose() * spatial.middleCols<3>(first);
}

}  // namespace

Eigen::Matrix3d shoulder_body_jacobian(const FollowerModel& model, const Eigen::VectorXd& q) {
  return body_jacobian(model, q, model.shoulder, kShoulder0);
}

Eigen::Matrix3d wrist_body_jacobian(const FollowerModel& model, const Eigen::VectorXd& q) {
  return body_jacobian(model, q, model.wrist, kWrist0);
}

FollowerMeasurement measure(const FollowerState& state, const FollowerModel& model,
                            std::mt19937_64* rng) {
  FollowerMeasurement m;
  m.joints = state.joints;
  if (rng && model.encoder_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, model.encoder_noise);
    for (auto& q : m.joints.angles) q += noise(*rng);
  }
  m.shoulder = shoulder_pose(model, m.joints.angles);
  m.wrist = wrist_pose(model, m.joints.angles);
  return m;
}

std::string state_to_json_line(const FollowerState& state) {
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j{{"time", state.time},
                   {"angles", vec(state.joints.angles)},
                   {"velocities", vec(state.joints.velocities)},
                   {"applied_torque", vec(state.applied_torque)}};
  return j.dump();
}

}  // namespace nuexo::sim
