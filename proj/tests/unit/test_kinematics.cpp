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
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"
#include "nuexo/kinematics/exo_chain.hpp"
#include "nuexo/kinematics/kinematics.hpp"
#include "nuexo/kinematics/segment.hpp"

namespace nuexo::kin {
namespace {

constexpr double kPi = std::numbers::pi;

// Standard DH row written out longhand, independent of DHLink::transform.
Eigen::Matrix4d dh_row(double theta, double d, double a, double alpha) {
  Eigen::Matrix4d rz = Eigen::Matrix4d::Identity(), tz = Eigen::Matrix4d::Identity(),
                  tx = Eigen::Matrix4d::Identity(), rx = Eigen::Matrix4d::Identity();
  rz(0, 0) = std::cos(theta), rz(0, 1) = -std::sin(theta);
  rz(1, 0) = std::sin(theta), rz(1, 1) = std::cos(theta);
  tz(2, 3) = d;
  tx(0, 3) = a;
  rx(1, 1) = std::cos(alpha), rx(1, 2) = -std::sin(alpha);
  rx(2, 1) = std::sin(alpha), rx(2, 2) = std::cos(alpha);
  return rz * tz * tx * rx;
}

Eigen::Vector3d angle_wrap(Eigen::Vector3d v) {
  for (auto& x : v) x = std::remainder(x, 2.0 * kPi);
  return v;
}

class ExoKinematics : public ::testing::Test {
 protected:
  ShoulderCoupling coupling;
  ExoGeometry geometry;
  std::vector<DHLink> chain = exo_chain(geometry, coupling);

  JointConfig random_config(std::mt19937_64& rng) const {
    // Inside the default ROM for the shoulder, moderate elbow/wrist angles.
    std::uniform_real_distribution<double> flex(-1.0, 3.1), horiz(-2.3, 0.5), abd(-0.5, 2.6),
        elbow(0.0, 2.2), wrist(-1.0, 1.0);
    Eigen::VectorXd q(5);
    q << flex(rng), horiz(rng), abd(rng), elbow(rng), wrist(rng);
    return JointConfig(q);
  }
};

TEST(CoupledLinkage, TableValues) {
  ShoulderCoupling c;
  EXPECT_DOUBLE_EQ(coupled_linkage_angles(0.0, c).theta_2, 0.938);
  EXPECT_NEAR(coupled_linkage_angles(0.5, c).theta_2, 1.660, 1e-12);
  EXPECT_NEAR(coupled_linkage_angles(-0.938 / 1.444, c).theta_2, 0.0, 1e-12);
}

TEST(CoupledLinkage, DecompositionSumsToCoupledAngle) {
  ShoulderCoupling c;
  for (double t = -1.0; t <= 2.0; t += 0.25) {
    const auto a = coupled_linkage_angles(t, c);
    EXPECT_NEAR(a.theta_2_1 + a.theta_3, a.theta_2, 1e-12);
    EXPECT_DOUBLE_EQ(a.theta_2_2, c.theta_e - kPi);
  }
}

TEST(CoupledLinkage, AffineDifference) {
  ShoulderCoupling c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(coupled_linkage_angles(a, c).theta_2 - coupled_linkage_angles(b, c).theta_2,
                1.444 * (a - b), 1e-12);
  }
}

TEST_F(ExoKinematics, ZeroConfigMatchesHandComposition) {
  const auto frames = forward_kinematics(JointConfig::zeros(5), chain, coupling);
  ASSERT_EQ(frames.size(), 8u);

  // Rows of the table with passive angles at θ1 = 0: θ_2_1 = 0, θ_2_2 = θ_E − π, θ_3 = 0.938.
  const Eigen::Matrix4d expected = dh_row(-kPi / 2, 0, 0, -kPi / 2) * dh_row(0, 0, 0, kPi / 2) *
                                   dh_row(0, 0, 0.150, 0) * dh_row(2.508 - kPi, 0, 0.187, 0) *
                                   dh_row(0.938, 0, 0, -kPi / 2) * dh_row(0, 0.28, 0, -kPi / 2) *
                                   dh_row(0, 0.25, 0, kPi / 2) * dh_row(0, 0, 0.08, kPi / 2);
  const Eigen::Matrix4d end = frames.back().isometry().matrix();
  EXPECT_TRUE(end.isApprox(expected, 1e-12)) << end << "\n\n" << expected;

  // Frozen from an external evaluation of the same composition.
  EXPECT_NEAR(frames.back().translation.x(), 0.180392945454427, 1e-12);
  EXPECT_NEAR(frames.back().translation.y(), -0.293102557185104, 1e-12);
  EXPECT_NEAR(frames.back().translation.z(), -0.25, 1e-12);
  EXPECT_NEAR(frames.back().rotation_matrix()(0, 1), 0.954024754871811, 1e-12);
}

TEST_F(ExoKinematics, RotationsAreOrthonormal) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    for (const auto& f : forward_kinematics(random_config(rng), chain, coupling)) {
      const Eigen::Matrix3d r = f.rotation_matrix();
      EXPECT_TRUE((r * r.transpose()).isApprox(Eigen::Matrix3d::Identity(), 1e-9));
      EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
      EXPECT_NEAR(f.rotation.norm(), 1.0, 1e-9);
    }
  }
}

TEST_F(ExoKinematics, DimensionMismatchIsConfigError) {
  EXPECT_THROW(forward_kinematics(JointConfig::zeros(4), chain, coupling), ConfigError);
  EXPECT_THROW(jacobian(JointConfig::zeros(6), chain, coupling), ConfigError);
}

// Central differences of the end frame: linear part from positions, angular
// part from the relative rotation R(q+δ)·R(q−δ)ᵀ.
Eigen::Matrix<double, 6, Eigen::Dynamic> fd_jacobian(const JointConfig& config,
                                                     const std::vector<DHLink>& chain,
                                                     const ShoulderCoupling& coupling, double h) {
  Eigen::Matrix<double, 6, Eigen::Dynamic> j(6, config.size());
  for (Eigen::Index i = 0; i < config.size(); ++i) {
    JointConfig plus = config, minus = config;
    plus.angles[i] += h;
    minus.angles[i] -= h;
    const Frame fp = forward_kinematics(plus, chain, coupling).back();
    const Frame fm = forward_kinematics(minus, chain, coupling).back();
    const Eigen::AngleAxisd rel(fp.rotation_matrix() * fm.rotation_matrix().transpose());
    j.block<3, 1>(0, i) = rel.angle() * rel.axis() / (2.0 * h);
    j.block<3, 1>(3, i) = (fp.translation - fm.translation) / (2.0 * h);
  }
  return j;
}

TEST_F(ExoKinematics, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_config(rng);
    const auto analytic = jacobian(q, chain, coupling);
    const auto numeric = fd_jacobian(q, chain, coupling, 1e-6);
    const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
    EXPECT_LT((analytic - numeric).cwiseAbs().maxCoeff() / scale, 1e-5);
  }
}

TEST_F(ExoKinematics, CoupledMotorColumnAddsGainWeightedLinkageColumn) {
  const auto q = JointConfig::zeros(5);
  const auto frames = forward_kinematics(q, chain, coupling);
  const Eigen::Vector3d tip = frames.back().translation;
  auto column = [&](std::size_t row) {
    const Eigen::Vector3d z = frames[row - 1].rotation_matrix().col(2);
    Eigen::Matrix<double, 6, 1> c;
    c << z, z.cross(tip - frames[row - 1].translation);
    return c;
  };
  // Motor 2 is row 1-2 (axis z of frame 0) plus the first linkage row scaled by the gain.
  const Eigen::Matrix<double, 6, 1> expected = column(1) + 1.444 * column(2);
  const auto j = jacobian(q, chain, coupling);
  EXPECT_TRUE(j.col(kShoulderMotor2).isApprox(expected, 1e-12));
}

TEST_F(ExoKinematics, ZeroVelocityGivesZeroTwist) {
  std::mt19937_64 rng(5);
  const auto j = jacobian(random_config(rng), chain, coupling);
  EXPECT_EQ((j * Eigen::VectorXd::Zero(5)).norm(), 0.0);
}

TEST_F(ExoKinematics, HumeralPoseAtRest) {
  const auto pose = humeral_pose(JointConfig::zeros(5), chain, coupling, kExoHumeralFrame);
  const Eigen::Matrix4d rest = dh_row(-kPi / 2, 0, 0, -kPi / 2) * dh_row(0, 0, 0, kPi / 2) *
                               dh_row(0, 0, 0.150, 0) * dh_row(2.508 - kPi, 0, 0.187, 0) *
                               dh_row(0.938, 0, 0, -kPi / 2) * dh_row(0, 0.28, 0, -kPi / 2);
  const Eigen::Quaterniond expected(Eigen::Matrix3d(rest.block<3, 3>(0, 0)));
  EXPECT_LT(angle_between(pose.orientation, expected), 1e-12);
  EXPECT_GE(pose.orientation.w(), 0.0);
  EXPECT_FALSE(pose.near_gimbal_lock);
}

TEST_F(ExoKinematics, FlexionMotorChangesOnlyYaw) {
  const auto rest = humeral_pose(JointConfig::zeros(5), chain, coupling, kExoHumeralFrame);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
  q[kShoulderFlexion] = 0.3;
  const auto moved = humeral_pose(JointConfig(q), chain, coupling, kExoHumeralFrame);
  const Eigen::Vector3d delta = angle_wrap(moved.euler - rest.euler);
  EXPECT_NEAR(delta.x(), 0.3, 1e-12);
  EXPECT_NEAR(delta.y(), 0.0, 1e-12);
  EXPECT_NEAR(delta.z(), 0.0, 1e-12);
}

TEST(Euler, RoundTripAwayFromGimbalLock) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  int checked = 0;
  while (checked < 500) {
    const Eigen::Quaterniond q =
        canonical(Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized());
    const Eigen::Vector3d e = euler_zyx(q);
    if (std::abs(std::abs(e.y()) - kPi / 2) < 1e-3) continue;
    EXPECT_LT(angle_between(from_euler_zyx(e), q), 1e-9);
    ++checked;
  }
}

TEST_F(ExoKinematics, GimbalAdjacentPoseIsFlagged) {
  // The humeral axis is horizontal at rest, so a quarter turn about it points
  // the humeral x axis straight down: pitch = π/2.
  Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
  q[kHumeralRotation] = kPi / 2;
  const auto p = humeral_pose(JointConfig(q), chain, coupling, kExoHumeralFrame);
  EXPECT_TRUE(p.near_gimbal_lock);
  EXPECT_NEAR(p.orientation.norm(), 1.0, 1e-12);

  q[kHumeralRotation] = kPi / 2 - 0.01;
  EXPECT_FALSE(humeral_pose(JointConfig(q), chain, coupling, kExoHumeralFrame).near_gimbal_lock);
}

TEST(GhCenter, ReferenceIsZero) {
  const std::vector<double> sweep{0.0};
  EXPECT_EQ(gh_center_displacement(sweep, ShoulderCoupling{}).front().norm(), 0.0);
}

TEST(GhCenter, ForwardComponentMonotoneWithCoupling) {
  std::vector<double> sweep;
  for (int i = 0; i <= 1000; ++i) sweep.push_back(i * 1e-3);
  const auto d = gh_center_displacement(sweep, ShoulderCoupling{});
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_GT(d[i].y(), d[i - 1].y());
  // Frozen from a planar two-link evaluation.
  EXPECT_NEAR(d.back().x(), -0.152854815911845, 1e-12);
  EXPECT_NEAR(d.back().y(), 0.395002240211153, 1e-12);
  EXPECT_NEAR(d[500].y(), 0.22635590286336, 1e-12);
}

TEST(GhCenter, RigidBaselineDoesNotMove) {
  ShoulderCoupling rigid;
  rigid.gain = 0.0;
  std::vector<double> sweep;
  for (int i = -100; i <= 200; ++i) sweep.push_back(i * 1e-2);
  for (const auto& v : gh_center_displacement(sweep, rigid)) EXPECT_EQ(v.norm(), 0.0);
}

class Rom : public ::testing::Test {
 protected:
  static constexpr double kDeg = kPi / 180.0;
  RomLimits limits = RomLimits::shoulder_defaults();

  RomVerdict check(std::size_t joint, double degrees) const {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
    q[static_cast<Eigen::Index>(joint)] = degrees * kDeg;
    return check_rom(JointConfig(q), limits);
  }
};

TEST_F(Rom, FlexionLimits) {
  EXPECT_TRUE(check(kShoulderFlexion, 180.0).all_within);
  EXPECT_TRUE(check(kShoulderFlexion, -60.0).all_within);
  EXPECT_FALSE(check(kShoulderFlexion, 190.0).all_within);
  EXPECT_FALSE(check(kShoulderFlexion, -61.0).all_within);
}

TEST_F(Rom, AbductionLimits) {
  EXPECT_TRUE(check(kHumeralRotation, 150.0).all_within);
  EXPECT_TRUE(check(kHumeralRotation, -30.0).all_within);
  EXPECT_FALSE(check(kHumeralRotation, -31.0).all_within);
  EXPECT_FALSE(check(kHumeralRotation, 151.0).all_within);
}

TEST_F(Rom, VerdictNamesTheFailingAxis) {
  const auto v = check(kShoulderMotor2, 31.0);
  EXPECT_FALSE(v.all_within);
  for (const auto& a : v.axes) {
    EXPECT_EQ(a.within, a.name != "horizontal_flexion_extension") << a.name;
  }
}

TEST(RomLimitsValidation, RejectsInvertedRange) {
  RomLimits r;
  r.axes.push_back({"bad", 0, 1.0, 0.5});
  EXPECT_THROW(r.validate(), ConfigError);
}

}  // namespace
}  // namespace nuexo::kin
