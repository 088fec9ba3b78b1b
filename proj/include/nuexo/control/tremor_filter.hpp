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

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nuexo::ctl {

/// Deadband-with-hold filter for the master stream, applied per axis.
///
/// A held axis keeps its output while the input stays strictly inside the
/// deadband around the held value. Leaving the deadband switches the axis to
/// tracking: output equals input. A tracking axis re-freezes once the input has
/// stayed within `hysteresis_exit` of an anchor for `settle_samples` samples;
/// the anchor moves whenever the input leaves that ball.
struct TremorFilterState {
  double deadband = 0.015;         // rad
  double hysteresis_exit = 0.015;  // rad, ≥ deadband
  std::size_t settle_samples = 50;

  Eigen::VectorXd held;
  Eigen::VectorXd anchor;
  std::vector<std::size_t> still;
  std::vector<bool> tracking;

  bool initialized() const { return held.size() > 0; }
  bool frozen(Eigen::Index axis) const { return !tracking.at(static_cast<std::size_t>(axis)); }
  /// Throws ConfigError unless 0 < deadband ≤ hysteresis_exit.
  void validate() const;
};

struct TremorFilterOutput {
  Eigen::VectorXd output;
  TremorFilterState state;
};

TremorFilterOutput tremor_filter(const Eigen::VectorXd& input, TremorFilterState state);

/// Backward-difference velocity estimate averaged over the last three
/// differences, i.e. (q_k − q_{k−3}) / 3Δt once warmed up.
class VelocityEstimator {
 public:
  explicit VelocityEstimator(double dt) : dt_(dt) {}

  Eigen::VectorXd update(const Eigen::VectorXd& sample);
  void reset() { history_.clear(); }

 private:
  double dt_;
  std::vector<Eigen::VectorXd> history_;
};

}  // namespace nuexo::ctl
