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


#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"
#include "nuexo/follower/follower.hpp"
#include "nuexo/kinematics/kinematics.hpp"

namespace nuexo::sim {
namespace {

FollowerModel unit_model() {
  FollowerModel m;
  m.name = "unit";
  m.joints.assign(kFollowerJoints, FollowerJoint{1.0, 0.0, 30.0, -100.0, 100.0, 0.0});
  finalize_model(m);
  return m;
}

Eigen::VectorXd zeros() { return Eigen::VectorXd::Zero(kFollowerJoints); }

TEST(FollowerStep, ZeroTorqueAtRestStaysPut) {
  const auto m = unit_model();
  FollowerState s;
  const auto next = step(s, zeros(), 0.001, m);
  EXPECT_EQ(next.joints.angles, s.joints.angles);
  EXPECT_EQ(next.joints.velocities, s.joints.velocities);
  EXPECT_DOUBLE_EQ(next.time, 0.001);
}

TEST(FollowerStep, UnitTorqueOnUnitInertiaReachesUnitVelocity) {
  const auto m = unit_model();
  FollowerState s;
  Eigen::VectorXd tau = zeros();
  tau[kElbowJoint] = 1.0;
  for (int i = 0; i < 1000; ++i) s = step(s, tau, 0.001, m);
  EXPECT_NEAR(s.joints.velocities[kElbowJoint], 1.0, 1e-3);
  EXPECT_NEAR(s.joints.angles[kElbowJoint], 0.5, 1e-3);
  EXPECT_EQ(s.joints.velocities[kShoulder0], 0.0);
}

TEST(FollowerStep, TorqueIsSaturatedAtTheLimit) {
  const auto m = unit_model();
  Eigen::VectorXd tau = zeros();
  tau[0] = 100.0;
  tau[1] = -100.0;
  const auto next = step(FollowerState{}, tau, 0.001, m);
  EXPECT_DOUBLE_EQ(next.applied_torque[0], 30.0);
  EXPECT_DOUBLE_EQ(next.applied_torque[1], -30.0);
  EXPECT_NEAR(next.joints.velocities[0], 0.03, 1e-12);
}

TEST(FollowerStep, AngleLimitClampsAndStopsJoint) {
  auto m = unit_model();
  m.joints[kWrist0].angle_max = 0.01;
  FollowerState s;
  Eigen::VectorXd tau = zeros();
  tau[kWrist0] = 5.0;
  for (int i = 0; i < 500; ++i) {
    s = step(s, tau, 0.001, m);
    ASSERT_LE(s.joints.angles[kWrist0], 0.01);
  }
  EXPECT_DOUBLE_EQ(s.joints.angles[kWrist0], 0.01);
  EXPECT_EQ(s.joints.velocities[kWrist0], 0.0);
}

TEST(FollowerStep, DampedFreeMotionNeverGainsEnergy) {
  auto m = unit_model();
  for (auto& j : m.joints) j.damping = 0.3;
  FollowerState s;
  s.joints.velocities.setConstant(2.0);
  auto energy = [&](const FollowerState& st) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < kFollowerJoints; ++i) {
      e += 0.5 * m.joints[static_cast<std::size_t>(i)].inertia * st.joints.velocities[i] * st.joints.velocities[i];
    }
    return e;
  };
  double previous = energy(s);
  for (int i = 0; i < 3000; ++i) {
    s = step(s, zeros(), 0.001, m);
    const double e = energy(s);
    ASSERT_LE(e, previous + 1e-15);
    previous = e;
  }
}

TEST(FollowerStep, GravityPullsUnsupportedJoint) {
  auto m = unit_model();
  m.gravity = true;
  m.joints[1].gravity_torque = 2.0;
  const auto next = step(FollowerState{}, zeros(), 0.001, m);
  EXPECT_NEAR(next.joints.velocities[1], -0.002, 1e-12);
  Eigen::VectorXd tau = m.gravity_load(FollowerState{}.joints.angles);
  const auto held = step(FollowerState{}, tau, 0.001, m);
  EXPECT_EQ(held.joints.velocities[1], 0.0);
}

TEST(FollowerStep, IsDeterministic) {
  const auto m = load_preset("heavy");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  FollowerState a, b;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd tau(kFollowerJoints);
    for (Eigen::Index k = 0; k < tau.size(); ++k) tau[k] = u(rng);
    a = step(a, tau, 0.001, m);
    b = step(b, tau, 0.001, m);
  }
  EXPECT_EQ(a.joints.angles, b.joints.angles);
  EXPECT_EQ(a.joints.velocities, b.joints.velocities);
}

TEST(FollowerStep, RejectsBadInput) {
  const auto m = unit_model();
  Eigen::VectorXd tau = zeros();
  EXPECT_THROW(step(FollowerState{}, tau, 0.0, m), ValidationError);
  EXPECT_THROW(step(FollowerState{}, tau, 0.02, m), ValidationError);
  tau[2] = std::nan("");
  EXPECT_THROW(step(FollowerState{}, tau, 0.001, m), ValidationError);
  EXPECT_THROW(step(FollowerState{}, Eigen::VectorXd::Zero(5), 0.001, m), ValidationError);
}

TEST(FollowerMeasure, NoiselessReadingIsExact) {
  const auto m = unit_model();
  FollowerState s;
  s.joints.angles.setLinSpaced(kFollowerJoints, -0.3, 0.4);
  std::mt19937_64 rng(1);
  const auto r = measure(s, m, &rng);
  EXPECT_EQ(r.joints.angles, s.joints.angles);
}

TEST(FollowerMeasure, NoiseHasConfiguredSpread) {
  auto m = unit_model();
  m.encoder_noise = 0.001;
  std::mt19937_64 rng(11);
  const FollowerState s;
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = measure(s, m, &rng).joints.angles[kElbowJoint];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd, 0.001, 0.0001);
}

TEST(FollowerKinematics, RestPoseMatchesHandComposition) {
  // Product of the seven DH rows at zero, evaluated independently.
  const auto m = unit_model();
  const auto frames = kin::forward_kinematics(kin::JointConfig::zeros(kChainJoints), m.chain, kin::ShoulderCoupling{});
  const auto& end = frames.back();
  EXPECT_NEAR(end.translation.x(), 0.5, 1e-12);
  EXPECT_NEAR(end.translation.y(), 0.0, 1e-12);
  EXPECT_NEAR(end.translation.z(), -0.08, 1e-12);
  EXPECT_TRUE(end.rotation_matrix().isApprox(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix(), 1e-12));
  const auto r = measure(FollowerState{}, m);
  EXPECT_LT(angle_between(r.shoulder, Eigen::Quaterniond::Identity()), 1e-12);
}

TEST(FollowerKinematics, SegmentPosesAreIdentityAtRest) {
  const auto m = unit_model();
  EXPECT_LT(angle_between(shoulder_pose(m, zeros()), Eigen::Quaterniond::Identity()), 1e-12);
  EXPECT_LT(angle_between(wrist_pose(m, zeros()), Eigen::Quaterniond::Identity()), 1e-12);
}

TEST(FollowerKinematics, BodyJacobiansAreIdentityAtRest) {
  const auto m = unit_model();
  EXPECT_TRUE(shoulder_body_jacobian(m, zeros()).isApprox(Eigen::Matrix3d::Identity(), 1e-12))
      << shoulder_body_jacobian(m, zeros());
  EXPECT_TRUE(wrist_body_jacobian(m, zeros()).isApprox(Eigen::Matrix3d::Identity(), 1e-12))
      << wrist_body_jacobian(m, zeros());
}

// Body angular velocity from finite differences of the pose: ω = log(Rᵀ R⁺)/h.
Eigen::Matrix3d numeric_body_jacobian(const FollowerModel& m, const Eigen::VectorXd& q,
                                      bool shoulder) {
  const Eigen::Index first = shoulder ? kShoulder0 : kWrist0;
  const auto pose = [&](const Eigen::VectorXd& x) {
    return shoulder ? shoulder_pose(m, x) : wrist_pose(m, x);
  };
  const double h = 1e-6;
  Eigen::Matrix3d j;
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd hi = q, lo = q;
    hi[first + c] += h;
    lo[first + c] -= h;
    j.col(c) = so3_log(pose(lo).conjugate() * pose(hi)) / (2 * h);
  }
  return j;
}

TEST(FollowerKinematics, BodyJacobiansMatchFiniteDifferences) {
  const auto m = unit_model();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd q(kFollowerJoints);
    for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = u(rng);
    EXPECT_LT((shoulder_body_jacobian(m, q) - numeric_body_jacobian(m, q, true)).norm(), 1e-6);
    EXPECT_LT((wrist_body_jacobian(m, q) - numeric_body_jacobian(m, q, false)).norm(), 1e-6);
  }
}

TEST(FollowerKinematics, WristPoseIgnoresShoulderAndElbow) {
  const auto m = unit_model();
  Eigen::VectorXd q = zeros();
  q[kWrist0 + 1] = 0.4;
  const auto ref = wrist_pose(m, q);
  q[kShoulder0] = 0.7;
  q[kElbowJoint] = 1.1;
  EXPECT_LT(angle_between(wrist_pose(m, q), ref), 1e-12);
}

TEST(FollowerPresets, BothPresetsLoadAndDiffer) {
  const auto light = load_preset("light");
  const auto heavy = load_preset("heavy");
  EXPECT_EQ(light.name, "light");
  EXPECT_FALSE(light.gravity);
  EXPECT_TRUE(heavy.gravity);
  EXPECT_DOUBLE_EQ(heavy.joints[kShoulder0].inertia, 0.5);
  EXPECT_DOUBLE_EQ(light.joints[kShoulder0].torque_limit, 30.0);
  EXPECT_DOUBLE_EQ(light.joints[kElbowJoint].torque_limit, 15.0);
  EXPECT_DOUBLE_EQ(light.joints[kFinger0].torque_limit, 1.0);
  EXPECT_THROW(load_preset("no-such-arm"), ConfigError);
}

class PresetFile : public ::testing::Test {
 protected:
  std::filesystem::path path_;
  std::string base_;

  void SetUp() override {
    path_ = std::filesystem::temp_directory_path() /
            ("nuexo_preset_" + std::to_string(::getpid()) + ".cfg");
    std::ifstream in(preset_directory() / "light.cfg");
    base_.assign(std::istreambuf_iterator<char>(in), {});
  }
  void TearDown() override { std::filesystem::remove(path_); }

  void write(const std::string& text) { std::ofstream(path_) << text; }
};

TEST_F(PresetFile, MissingInertiaNamesTheKey) {
  std::string text = base_;
  const auto at = text.find("elbow.inertia");
  text.erase(at, text.find('\n', at) - at);
  write(text);
  try {
    load_model(path_);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("elbow.inertia"), std::string::npos) << e.what();
  }
}

TEST_F(PresetFile, InvalidFieldReportsLine) {
  write("name = bad\nshoulder.inertia = -1\n");
  try {
    load_model(path_);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("shoulder.inertia"), std::string::npos) << e.what();
  }
}

TEST_F(PresetFile, UnknownKeyIsRejected) {
  write(base_ + "\nelbow.stiffness = 3\n");
  EXPECT_THROW(load_model(path_), ConfigError);
}

TEST_F(PresetFile, PerJointListsAreAccepted) {
  std::string text = base_;
  const auto at = text.find("shoulder.inertia = 0.04");
  text.replace(at, std::string("shoulder.inertia = 0.04").size(), "shoulder.inertia = 0.1, 0.2, 0.3");
  write(text);
  const auto m = load_model(path_);
  EXPECT_DOUBLE_EQ(m.joints[2].inertia, 0.3);
  EXPECT_DOUBLE_EQ(m.joints[0].inertia, 0.1);
}

}  // namespace
}  // namespace nuexo::sim
