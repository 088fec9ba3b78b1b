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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nuexo::bench {

struct EncoderModel {
  double quantization = 0.0015;  // rad
  double sigma = 0.002;          // rad
  void validate() const;
};

/// Strap-mounted inertial capture. After the perturbation phase the straps
/// have slipped: every sample carries slip_bias scaled by a per-run factor
/// drawn uniformly from [slip_scale_min, slip_scale_max].
struct ImcModel {
  double sigma = 0.01;  // rad
  Eigen::Vector3d slip_bias{0.17, -0.37, 0.26};
  double slip_scale_min = 1.0;
  double slip_scale_max = 0.41 / 0.37;
  void validate() const;
};

enum class Phase { start, after_perturbation };
const char* to_string(Phase phase);

/// Shoulder angles (x flexion, y abduction, z rotation) sampled uniformly.
struct Trajectory {
  double rate = 100.0;  // Hz
  std::vector<Eigen::Vector3d> angles;
  std::size_t static_begin = 0;  // first sample of the final hold
};

/// Standardized abduction: rest, raise to 1.4 rad, brief hold, lower to 0.8
/// rad, then a 2 s static hold that forms the static window.
Trajectory standard_abduction(double rate = 100.0);

struct SensorEstimates {
  std::vector<Eigen::Vector3d> imc;
  std::vector<Eigen::Vector3d> encoder;
  double slip_scale = 0.0;  // drawn factor, applied only after perturbation
};

/// Deterministic for a given seed.
SensorEstimates simulate_sensors(const Trajectory& truth, const ImcModel& imc, const EncoderModel& encoder,
                                 Phase phase, std::uint64_t seed);

/// Signed statistics of estimate − truth. `max` is the deviation with the
/// largest magnitude (sign kept); `avg` is the mean signed deviation.
struct AxisStats {
  double max = 0.0;
  double avg = 0.0;
  double static_max = 0.0;
  double static_avg = 0.0;
};
using SystemStats = std::array<AxisStats, 3>;

/// Throws std::invalid_argument on empty or mismatched inputs, or a static
/// window outside the data.
SystemStats deviation_stats(const std::vector<Eigen::Vector3d>& estimate,
                            const std::vector<Eigen::Vector3d>& truth, std::size_t static_begin);

struct DeviationReport {
  Phase phase = Phase::start;
  SystemStats exo;
  SystemStats imc;
};

struct ProtocolResult {
  DeviationReport start;
  DeviationReport after;
  double slip_scale = 1.0;
  /// Abduction-axis deviation series after perturbation, for the spectrum.
  std::vector<double> exo_error;
  std::vector<double> imc_error;
};

/// Calibration, baseline, perturbation and post-perturbation measurement on
/// the standard abduction task.
ProtocolResult run_protocol(std::uint64_t seed, const ImcModel& imc = {}, const EncoderModel& encoder = {},
                            const Trajectory& truth = standard_abduction());

/// One-sided power spectral density (rad²/Hz) of a real series via FFT, with
/// the mean removed. Returns (frequency Hz, density) pairs from DC to Nyquist.
std::vector<std::pair<double, double>> noise_spectrum(const std::vector<double>& series, double rate);

/// Table-shaped CSV: phase, system, axis, max, avg, static_max, static_avg.
void write_report_csv(const std::filesystem::path& path, const std::vector<DeviationReport>& reports);

}  // namespace nuexo::bench
