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

#include "nuexo/control/tremor_filter.hpp"

#include <cmath>

#include "nuexo/common/errors.hpp"

namespace nuexo::ctl {

void TremorFilterState::validate() const {
  if (!(deadband > 0.0) || !(hysteresis_exit >= deadband)) {
    throw ConfigError("tremor filter needs 0 < deadband <= hysteresis_exit");
  }
}

TremorFilterOutput tremor_filter(const Eigen::VectorXd& input, TremorFilterState state) {
  state.validate();
  const Eigen::Index n = input.size();
  if (!state.initialized()) {
    state.held = input;
    state.anchor = input;
    state.still.assign(static_cast<std::size_t>(n), 0);
    state.tracking.assign(static_cast<std::size_t>(n), false);
    return {input, std::move(state)};
  }
  if (state.held.size() != n) throw ValidationError("tremor filter input changed dimension");

  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double x = input[i];
    if (!state.tracking[k]) {
      if (std::abs(x - state.held[i]) < state.deadband) {
        out[i] = state.held[i];
        continue;
      }
      state.tracking[k] = true;
      state.anchor[i] = x;
      state.still[k] = 0;
    } else if (std::abs(x - state.anchor[i]) >= state.hysteresis_exit) {
      state.anchor[i] = x;
      state.still[k] = 0;
    } else if (++state.still[k] >= state.settle_samples) {
      state.tracking[k] = false;
    }
    state.held[i] = x;
    out[i] = x;
  }
  return {out, std::move(state)};
}

Eigen::VectorXd VelocityEstimator::update(const Eigen::VectorXd& sample) {
  history_.push_back(sample);
  if (history_.size() > 4) history_.erase(history_.begin());
  if (history_.size() < 2) return Eigen::VectorXd::Zero(sample.size());
  const double span = static_cast<double>(history_.size() - 1);
  return (history_.back() - history_.front()) / (span * dt_);
}

}  // namespace nuexo::ctl
