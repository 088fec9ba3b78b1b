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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"
#include "nuexo/control/compensation.hpp"
#include "nuexo/control/impedance.hpp"
#include "nuexo/control/tremor_filter.hpp"

namespace nuexo::ctl {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Quaterniond random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Eigen::Quaterniond about(const Eigen::Vector3d& axis, double angle) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized()));
}

TEST(QuatError, EqualOrientationsGiveIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_unit(rng);
    const auto e = quat_error(q, q);
    EXPECT_NEAR(e.w(), 1.0, 1e-12);
    EXPECT_NEAR(e.vec().norm(), 0.0, 1e-12);
  }
}

TEST(QuatError, IdentityFollower) {
  const auto m = about(Eigen::Vector3d::UnitZ(), kPi / 2);
  const auto e = quat_error(Eigen::Quaterniond::Identity(), m);
  EXPECT_TRUE(e.coeffs().isApprox(m.coeffs(), 1e-15));
}

TEST(QuatError, GroupIdentityAndCanonicalForm) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_unit(rng);
    const auto m = random_unit(rng);
    const auto t = quat_error(s, m);
    EXPECT_NEAR(t.norm(), 1.0, 1e-9);
    EXPECT_GE(t.w(), 0.0);
    // s·t equals m up to the sign of the double cover.
    const Eigen::Quaterniond st = s * t;
    EXPECT_NEAR(std::abs(st.dot(m)), 1.0, 1e-9);
    EXPECT_LT(angle_between(st, m), 1e-7);
  }
}

TEST(QuatError, RejectsNonUnitInput) {
  const Eigen::Quaterniond bad(1.01, 0, 0, 0);
  EXPECT_THROW(quat_error(bad, Eigen::Quaterniond::Identity()), ValidationError);
  EXPECT_THROW(quat_error(Eigen::Quaterniond::Identity(), bad), ValidationError);
  EXPECT_NO_THROW(quat_error(Eigen::Quaterniond(1.0 + 5e-7, 0, 0, 0), Eigen::Quaterniond::Identity()));
}

TEST(VelocityError, Examples) {
  const Eigen::Vector3d a(0.3, -0.2, 0.7), b(-0.1, 0.4, 0.2);
  EXPECT_EQ(velocity_error(a, a), Eigen::Vector3d::Zero());
  EXPECT_EQ(velocity_error(Eigen::Vector3d(0.1, 0, 0), Eigen::Vector3d::Zero()),
            Eigen::Vector3d(0.1, 0, 0));
  EXPECT_EQ(velocity_error(a, b), -velocity_error(b, a));
}

TEST(RotationVector, Examples) {
  EXPECT_EQ(rotation_vector(Eigen::Quaterniond::Identity()), Eigen::Vector3d::Zero());
  const auto r = rotation_vector(about(Eigen::Vector3d::UnitZ(), kPi / 2));
  EXPECT_NEAR(r.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.y(), 0.0, 1e-15);
  EXPECT_NEAR(r.z(), kPi / 2, 1e-15);
}

TEST(RotationVector, ExponentialRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto q = canonical(random_unit(rng));
    const Eigen::Vector3d r = rotation_vector(q);
    // Oracle: Eigen's angle-axis constructor, not our exponential map.
    const Eigen::Quaterniond back(Eigen::AngleAxisd(r.norm(), r.normalized()));
    EXPECT_NEAR(std::abs(back.dot(q)), 1.0, 1e-12);
    EXPECT_LT(angle_between(back, q), 1e-9);
    EXPECT_LT(angle_between(so3_exp(r), q), 1e-9);
  }
}

TEST(RotationVector, ContinuousThroughIdentity) {
  for (double a : {1e-3, 1e-5, 9e-7, 1e-7, 1e-9, 1e-12}) {
    const Eigen::Vector3d axis = Eigen::Vector3d(1, -2, 0.5).normalized();
    const Eigen::Vector3d r = rotation_vector(about(axis, a));
    EXPECT_NEAR((r - a * axis).norm() / a, 0.0, 1e-9) << a;
  }
}

TEST(ShoulderImpedance, ZeroErrorGivesZeroTorque) {
  const auto g = ImpedanceGains::uniform(3, 20, 2, 0.1);
  const auto r = shoulder_impedance_torque(PoseError{}, Eigen::Matrix3d::Identity(), BindingForce{}, g, 30);
  EXPECT_EQ(r.torque, Eigen::Vector3d::Zero());
  EXPECT_FALSE(r.singular);
}

TEST(ShoulderImpedance, StiffnessTermWithIdentityJacobian) {
  PoseError e;
  e.rotation = about(Eigen::Vector3d::UnitX(), 0.1);
  const auto r = shoulder_impedance_torque(e, Eigen::Matrix3d::Identity(), BindingForce{},
                                           ImpedanceGains::uniform(3, 1, 0, 0), 30);
  EXPECT_NEAR(r.torque[0], 0.1, 1e-12);
  EXPECT_NEAR(r.torque[1], 0.0, 1e-12);
  EXPECT_NEAR(r.torque[2], 0.0, 1e-12);
}

TEST(ShoulderImpedance, ForceInjectionTerm) {
  BindingForce f;
  f.wrench.torque = Eigen::Vector3d(0, 0, 0.5);
  f.wrench.force = Eigen::Vector3d(3, 4, 5);  // ignored by a 3-row Jacobian
  const auto r = shoulder_impedance_torque(PoseError{}, Eigen::Matrix3d::Identity(), f,
                                           ImpedanceGains::uniform(3, 0, 0, 1), 30);
  EXPECT_NEAR((r.torque - Eigen::Vector3d(0, 0, 0.5)).norm(), 0.0, 1e-12);
}

TEST(ShoulderImpedance, DampingUsesPseudoinverse) {
  Eigen::Matrix3d j;
  j << 2, 0, 0, 0, 1, 1, 0, 0, 1;
  PoseError e;
  e.velocity = Eigen::Vector3d(0.2, -0.1, 0.3);
  const auto r = shoulder_impedance_torque(e, j, BindingForce{}, ImpedanceGains::uniform(3, 0, 1, 0), 30);
  EXPECT_NEAR((r.torque - j.inverse() * e.velocity).norm(), 0.0, 1e-7);
}

TEST(ShoulderImpedance, LinearInEachTermWhenUnclamped) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 0.1);
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity() + 0.2 * Eigen::Matrix3d::Random();
  const auto g = ImpedanceGains::uniform(3, 20, 2, 0.1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d rv(n(rng), n(rng), n(rng));
    const Eigen::Vector3d vel(n(rng), n(rng), n(rng));
    BindingForce f;
    f.wrench.torque = Eigen::Vector3d(n(rng), n(rng), n(rng));
    auto torque = [&](double a, double b, double c) {
      PoseError e{so3_exp(a * rv), b * vel};
      BindingForce fc = f;
      fc.wrench.torque *= c;
      return shoulder_impedance_torque(e, j, fc, g, 1e6).torque;
    };
    const Eigen::VectorXd base = torque(0, 0, 0);
    EXPECT_LT((torque(2, 0, 0) - 2 * torque(1, 0, 0)).norm(), 1e-12);
    EXPECT_LT((torque(0, 3, 0) - 3 * torque(0, 1, 0)).norm(), 1e-12);
    EXPECT_LT((torque(0, 0, -2) + 2 * torque(0, 0, 1)).norm(), 1e-12);
    EXPECT_LT((torque(1, 1, 1) - torque(1, 0, 0) - torque(0, 1, 0) - torque(0, 0, 1)).norm(), 1e-12);
    EXPECT_EQ(base.norm(), 0.0);
  }
}

TEST(ShoulderImpedance, SingularJacobianIsFlagged) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
  j(2, 2) = 0.0;
  PoseError e;
  e.velocity = Eigen::Vector3d(0, 0, 1);
  const auto r = shoulder_impedance_torque(e, j, BindingForce{}, ImpedanceGains::uniform(3, 0, 1, 0), 30);
  EXPECT_TRUE(r.singular);
  EXPECT_TRUE(r.torque.allFinite());
}

TEST(ShoulderImpedance, ClampsToLimit) {
  PoseError e;
  e.rotation = about(Eigen::Vector3d::UnitY(), 2.0);
  const auto r = shoulder_impedance_torque(e, Eigen::Matrix3d::Identity(), BindingForce{},
                                           ImpedanceGains::uniform(3, 20, 0, 0), 30);
  EXPECT_TRUE(r.clamped);
  EXPECT_DOUBLE_EQ(r.torque[1], 30.0);
}

TEST(JointImpedance, Examples) {
  EXPECT_NEAR(joint_impedance_torque(0.05, 0.0, 0, 0, 0, {2, 0, 0}, 15), 0.1, 1e-12);
  EXPECT_EQ(joint_impedance_torque(0, 0, 0, 0, 0, {20, 2, 0.1}, 15), 0.0);
  // Δq = 0.1, Δq̇ = −0.2, τ_ft = 0.05 → 0.1 − 0.1 + 0.05.
  EXPECT_NEAR(joint_impedance_torque(0.3, 0.2, -0.1, 0.1, 0.05, {1, 0.5, 1}, 15), 0.05, 1e-12);
  EXPECT_DOUBLE_EQ(joint_impedance_torque(1.0, 0.0, 0, 0, 0, {20, 0, 0}, 15), 15.0);
  EXPECT_DOUBLE_EQ(joint_impedance_torque(0.0, 1.0, 0, 0, 0, {20, 0, 0}, 1), -1.0);
}

TEST(DynamicsCompensation, Examples) {
  auto m = CompensationModel::zeros(1);
  kin::JointConfig zero = kin::JointConfig::zeros(1);
  EXPECT_EQ(dynamics_compensation(zero, Eigen::VectorXd::Zero(1), m)[0], 0.0);
  EXPECT_DOUBLE_EQ(dynamics_compensation(zero, Eigen::VectorXd::Constant(1, 2.0), m)[0], 2.0);

  // Horizontal link: point mass 1 kg at 0.3 m, statics m·g·r.
  m.link_mass << 1.0;
  m.link_lever << 0.3;
  EXPECT_NEAR(dynamics_compensation(zero, Eigen::VectorXd::Zero(1), m)[0], 1.0 * 9.81 * 0.3, 1e-12);
  EXPECT_NEAR(dynamics_compensation(kin::JointConfig(Eigen::VectorXd::Constant(1, kPi / 2)),
                                    Eigen::VectorXd::Zero(1), m)[0],
              0.0, 1e-12);
}

TEST(DynamicsCompensation, FrictionAndVelocityProducts) {
  auto m = CompensationModel::zeros(2);
  m.viscous << 0.5, 0.0;
  m.coulomb << 0.0, 0.2;
  m.coriolis << 0.0, 1.0, 0.0, 0.0;
  kin::JointConfig s(Eigen::VectorXd::Zero(2), Eigen::Vector2d(0.4, -1.0));
  const auto tau = dynamics_compensation(s, Eigen::VectorXd::Zero(2), m);
  EXPECT_NEAR(tau[0], 0.5 * 0.4 + 1.0 * 1.0, 1e-12);
  EXPECT_NEAR(tau[1], 0.2 * std::tanh(-1.0 / 0.01), 1e-12);
}

TEST(DynamicsCompensation, RejectsNonSpdInertia) {
  auto m = CompensationModel::zeros(2);
  m.inertia << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(dynamics_compensation(kin::JointConfig::zeros(2), Eigen::VectorXd::Zero(2), m), ConfigError);
  m.inertia << 1.0, 0.1, 0.0, 1.0;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(FcmAssist, Examples) {
  std::vector<BindingTerm> b{{Eigen::Matrix3d::Identity(), {}}, {Eigen::Matrix3d::Identity(), {}}};
  EXPECT_EQ(fcm_assist(b, 1.0).norm(), 0.0);

  std::vector<BindingTerm> one{{Eigen::Matrix3d::Identity(), {}}};
  one[0].wrench.torque = Eigen::Vector3d(0.3, 0, 0);
  EXPECT_NEAR((fcm_assist(one, 1.0) - Eigen::Vector3d(0.3, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(FcmAssist, Linear) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Eigen::MatrixXd j1 = Eigen::MatrixXd::Random(6, 5), j2 = Eigen::MatrixXd::Random(6, 5);
  std::vector<BindingTerm> b{{j1, {}}, {j2, {}}};
  for (auto& t : b) {
    t.wrench.force = Eigen::Vector3d(n(rng), n(rng), n(rng));
    t.wrench.torque = Eigen::Vector3d(n(rng), n(rng), n(rng));
  }
  auto doubled = b;
  for (auto& t : doubled) {
    t.wrench.force *= 2;
    t.wrench.torque *= 2;
  }
  EXPECT_LT((fcm_assist(doubled, 0.7) - 2 * fcm_assist(b, 0.7)).norm(), 1e-12);
}

TEST(ExoCommand, Examples) {
  const Eigen::Vector2d lim(5, 5);
  EXPECT_EQ(exo_command(Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 0), lim), Eigen::Vector2d(1, 2));
  EXPECT_EQ(exo_command(Eigen::Vector2d(1, -1), Eigen::Vector2d(-1, 1), lim), Eigen::Vector2d(0, 0));
  EXPECT_EQ(exo_command(Eigen::Vector2d(4, 0), Eigen::Vector2d(3, 0), lim), Eigen::Vector2d(5, 0));
  EXPECT_THROW(exo_command(Eigen::Vector2d(1, 2), Eigen::Vector3d(0, 0, 0), lim), ValidationError);
}

TEST(ExoCommand, CommutativeAndAssociativeBeforeClamp) {
  const Eigen::Vector3d big(1e9, 1e9, 1e9);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng)), c(n(rng), n(rng), n(rng));
    EXPECT_EQ(exo_command(a, b, big), exo_command(b, a, big));
    EXPECT_LT((exo_command(exo_command(a, b, big), c, big) - exo_command(a, exo_command(b, c, big), big)).norm(),
              1e-12);
  }
}

class Tremor : public ::testing::Test {
 protected:
  TremorFilterState state;

  std::vector<double> run(const std::vector<double>& signal) {
    std::vector<double> out;
    for (double x : signal) {
      auto r = tremor_filter(Eigen::VectorXd::Constant(1, x), state);
      state = std::move(r.state);
      out.push_back(r.output[0]);
    }
    return out;
  }

  static std::vector<double> sine(double center, double amplitude, double hz, double seconds) {
    std::vector<double> s;
    for (int k = 0; k < static_cast<int>(seconds * 500); ++k) {
      s.push_back(center + amplitude * std::sin(2 * kPi * hz * k / 500.0));
    }
    return s;
  }
};

TEST_F(Tremor, ConstantInputPassesThrough) {
  const auto out = run(std::vector<double>(100, 0.42));
  for (double y : out) EXPECT_EQ(y, 0.42);
}

TEST_F(Tremor, SubDeadbandSineIsFrozen) {
  for (double amp : {0.01, 0.014}) {
    state = TremorFilterState{};
    const auto out = run(sine(0.3, amp, 5.0, 4.0));
    for (double y : out) EXPECT_EQ(y, out.front());
  }
}

TEST_F(Tremor, StepPassesOnFirstSampleBeyondDeadband) {
  std::vector<double> s(10, 0.0);
  s.insert(s.end(), 10, 0.1);
  const auto out = run(s);
  EXPECT_EQ(out[9], 0.0);
  EXPECT_EQ(out[10], 0.1);
}

TEST_F(Tremor, LargeSinePassesThrough) {
  const auto in = sine(0.0, 0.05, 1.0, 4.0);
  const auto out = run(in);
  const auto [lo, hi] = std::minmax_element(out.begin() + 500, out.end());
  EXPECT_GE((*hi - *lo) / 2.0, 0.9 * 0.05);
}

TEST_F(Tremor, RefreezesAfterSettling) {
  std::vector<double> s(5, 0.0);
  s.insert(s.end(), 100, 0.2);
  s.insert(s.end(), 20, 0.21);  // inside the deadband of the frozen value
  const auto out = run(s);
  EXPECT_EQ(out.back(), 0.2);
}

TEST_F(Tremor, OutputStaysNearInput) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> step(0.0, 0.004);
  double x = 0.0;
  std::vector<double> in;
  for (int k = 0; k < 20000; ++k) in.push_back(x += step(rng));
  const auto out = run(in);
  for (std::size_t k = 0; k < in.size(); ++k) {
    EXPECT_LE(std::abs(out[k] - in[k]), state.deadband + state.hysteresis_exit);
    if (k > 0 && std::abs(in[k] - out[k - 1]) < state.deadband && state.frozen(0) &&
        out[k] != in[k]) {
      EXPECT_EQ(out[k], out[k - 1]);
    }
  }
}

TEST(TremorConfig, RejectsBadDeadband) {
  TremorFilterState s;
  s.deadband = 0.0;
  EXPECT_THROW(tremor_filter(Eigen::VectorXd::Zero(1), s), ConfigError);
  s.deadband = 0.02;
  s.hysteresis_exit = 0.01;
  EXPECT_THROW(tremor_filter(Eigen::VectorXd::Zero(1), s), ConfigError);
}

TEST(VelocityEstimatorTest, RampSlopeAfterWarmup) {
  VelocityEstimator est(0.002);
  Eigen::VectorXd v;
  for (int k = 0; k < 10; ++k) v = est.update(Eigen::VectorXd::Constant(2, 0.5 * k * 0.002));
  EXPECT_NEAR(v[0], 0.5, 1e-12);
  EXPECT_NEAR(v[1], 0.5, 1e-12);
}

}  // namespace
}  // namespace nuexo::ctl
