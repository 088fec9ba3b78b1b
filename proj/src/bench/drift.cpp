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


#include "nuexo/bench/drift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fftw3.h>

#include "nuexo/common/errors.hpp"

namespace nuexo::bench {
namespace {

double ease(double from, double to, double s) {
  s = std::clamp(s, 0.0, 1.0);
  return from + (to - from) * 0.5 * (1.0 - std::cos(std::numbers::pi * s));
}

}  // namespace

void EncoderModel::validate() const {
  if (!(quantization >= 0.0) || !(sigma >= 0.0)) throw ConfigError("encoder step and noise must be non-negative");
}

void ImcModel::validate() const {
  if (!(sigma >= 0.0)) throw ConfigError("IMC noise must be non-negative");
  if (!slip_bias.allFinite()) throw ConfigError("IMC slip bias must be finite");
  if (!(slip_scale_min >= 0.0 && slip_scale_min <= slip_scale_max)) {
    throw ConfigError("IMC slip scale range must satisfy 0 <= min <= max");
  }
}

const char* to_string(Phase phase) { return phase == Phase::start ? "start" : "after-perturbation"; }

Trajectory standard_abduction(double rate) {
  Trajectory t;
  t.rate = rate;
  const auto n = static_cast<std::size_t>(std::lround(10.0 * rate));
  t.static_begin = static_cast<std::size_t>(std::lround(8.0 * rate));
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / rate;
    double abduction = 0.0;
    if (s < 1.0) {
      abduction = 0.0;
    } else if (s < 4.0) {
      abduction = ease(0.0, 1.4, (s - 1.0) / 3.0);
    } else if (s < 5.0) {
      abduction = 1.4;
    } else if (s < 8.0) {
      abduction = ease(1.4, 0.8, (s - 5.0) / 3.0);
    } else {
      abduction = 0.8;
    }
    t.angles.emplace_back(0.1 * abduction, abduction, -0.15 * abduction);
  }
  return t;
}

SensorEstimates simulate_sensors(const Trajectory& truth, const ImcModel& imc, const EncoderModel& enc,
                                 Phase phase, std::uint64_t seed) {
  imc.validate();
  enc.validate();
  std::mt19937_64 rng(seed * 2 + (phase == Phase::start ? 0 : 1));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> scale_draw(0.0, 1.0);
  const double scale = imc.slip_scale_min + (imc.slip_scale_max - imc.slip_scale_min) * scale_draw(rng);
  const Eigen::Vector3d slip = phase == Phase::after_perturbation ? Eigen::Vector3d(imc.slip_bias * scale)
                                                                  : Eigen::Vector3d::Zero();
  SensorEstimates out;
  out.slip_scale = scale;
  for (const auto& a : truth.angles) {
    if (!a.allFinite()) throw ValidationError("trajectory sample is not finite");
    Eigen::Vector3d e = a;
    if (enc.quantization > 0.0) e = (a / enc.quantization).array().round() * enc.quantization;
    out.encoder.push_back(e + enc.sigma * Eigen::Vector3d(unit(rng), unit(rng), unit(rng)));
    out.imc.push_back(a + slip + imc.sigma * Eigen::Vector3d(unit(rng), unit(rng), unit(rng)));
  }
  return out;
}

SystemStats deviation_stats(const std::vector<Eigen::Vector3d>& estimate, const std::vector<Eigen::Vector3d>& truth,
                            std::size_t static_begin) {
  if (estimate.empty()) throw std::invalid_argument("deviation statistics need at least one sample");
  if (estimate.size() != truth.size()) throw std::invalid_argument("estimate and truth lengths differ");
  if (static_begin >= estimate.size()) throw std::invalid_argument("static window is empty");
  SystemStats stats;
  for (int axis = 0; axis < 3; ++axis) {
    auto summarize = [&](std::size_t begin, double& max, double& avg) {
      double sum = 0.0;
      max = 0.0;
      for (std::size_t i = begin; i < estimate.size(); ++i) {
        const double d = estimate[i][axis] - truth[i][axis];
        sum += d;
        if (std::abs(d) > std::abs(max)) max = d;
      }
      avg = sum / static_cast<double>(estimate.size() - begin);
    };
    auto& s = stats[static_cast<std::size_t>(axis)];
    summarize(0, s.max, s.avg);
    summarize(static_begin, s.static_max, s.static_avg);
  }
  return stats;
}

ProtocolResult run_protocol(std::uint64_t seed, const ImcModel& imc, const EncoderModel& enc, const Trajectory& truth) {
  ProtocolResult r;
  // Calibration zeroes both systems on the rest pose, so biases before the
  // perturbation are nil; baseline acquisition is the start-phase run.
  const auto start = simulate_sensors(truth, imc, enc, Phase::start, seed);
  r.start = {Phase::start, deviation_stats(start.encoder, truth.angles, truth.static_begin),
             deviation_stats(start.imc, truth.angles, truth.static_begin)};
  // The perturbation itself (rapid large-range motion) is what moves the
  // straps; its only lasting trace in the model is the slip bias.
  const auto after = simulate_sensors(truth, imc, enc, Phase::after_perturbation, seed);
  r.after = {Phase::after_perturbation, deviation_stats(after.encoder, truth.angles, truth.static_begin),
             deviation_stats(after.imc, truth.angles, truth.static_begin)};
  r.slip_scale = after.slip_scale;
  for (std::size_t i = 0; i < truth.angles.size(); ++i) {
    r.exo_error.push_back(after.encoder[i].y() - truth.angles[i].y());
    r.imc_error.push_back(after.imc[i].y() - truth.angles[i].y());
  }
  return r;
}

std::vector<std::pair<double, double>> noise_spectrum(const std::vector<double>& series, double rate) {
  const int n = static_cast<int>(series.size());
  if (n < 2) throw std::invalid_argument("spectrum needs at least two samples");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= n;

  std::vector<double> in(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) in[i] = series[i] - mean;
  std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<std::pair<double, double>> psd;
  for (int k = 0; k <= n / 2; ++k) {
    const auto& c = out[static_cast<std::size_t>(k)];
    double p = (c[0] * c[0] + c[1] * c[1]) / (rate * n);
    if (k != 0 && !(n % 2 == 0 && k == n / 2)) p *= 2.0;
    psd.emplace_back(k * rate / n, p);
  }
  return psd;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<DeviationReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  out << "phase,system,axis,max,avg,static_max,static_avg\n";
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  for (const auto& r : reports) {
    for (const auto& [name, stats] : {std::pair{"EXO", &r.exo}, std::pair{"IMC", &r.imc}}) {
      for (std::size_t a = 0; a < 3; ++a) {
        const auto& s = (*stats)[a];
        out << to_string(r.phase) << ',' << name << ',' << kAxes[a] << ',' << s.max << ',' << s.avg << ','
            << s.static_max << ',' << s.static_avg << '\n';
      }
    }
  }
}

}  // namespace nuexo::bench
