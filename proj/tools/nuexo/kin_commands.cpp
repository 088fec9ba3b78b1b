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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <vector>

#include "commands.hpp"
#include "nuexo/bus/config.hpp"
#include "nuexo/kinematics/exo_chain.hpp"
#include "nuexo/kinematics/kinematics.hpp"

namespace nuexo::cli {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct SweepArgs {
  std::string config;
  std::string out;
  double step_deg = 1.0;
  double margin_deg = 10.0;
};

void write_gh(std::ostream& os, const bus::ExoModel& exo, double step) {
  std::vector<double> sweep;
  for (double t = 0.0; t <= 1.0 + 1e-12; t += step) sweep.push_back(t);
  const auto d = kin::gh_center_displacement(sweep, exo.coupling);
  os << "theta1_rad,theta2_rad,dx_m,dy_m,horizontal_m\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    os << sweep[i] << ',' << exo.coupling.coupled_angle(sweep[i]) << ',' << d[i].x() << ',' << d[i].y() << ','
       << d[i].head<2>().norm() << '\n';
  }
}

void write_rom(std::ostream& os, const bus::ExoModel& exo, double step_deg, double margin_deg) {
  os << "axis,angle_deg,angle_rad,within\n";
  for (const auto& axis : exo.rom.axes) {
    const double lo = std::round(axis.min / kDeg) - margin_deg;
    const double hi = std::round(axis.max / kDeg) + margin_deg;
    for (double deg = lo; deg <= hi + 1e-9; deg += step_deg) {
      auto q = kin::JointConfig::zeros(kin::kExoActiveJoints);
      q.angles[static_cast<Eigen::Index>(axis.joint)] = deg * kDeg;
      kin::RomLimits single;
      single.axes = {axis};
      os << axis.name << ',' << deg << ',' << deg * kDeg << ','
         << (kin::check_rom(q, single).all_within ? 1 : 0) << '\n';
    }
  }
}

}  // namespace

void add_kin_commands(CLI::App& app) {
  auto* kin = app.add_subcommand("kin", "Exoskeleton kinematics tables");
  kin->require_subcommand(1);
  auto args = std::make_shared<SweepArgs>();
  auto* sweep = kin->add_subcommand("sweep", "GH-center displacement and ROM sweep as CSV");
  sweep->add_option("--config", args->config, "Configuration file")->check(CLI::ExistingFile);
  sweep->add_option("--out", args->out, "Write gh_displacement.csv and rom_sweep.csv here instead of stdout");
  sweep->add_option("--step", args->step_deg, "ROM sweep step in degrees")->check(CLI::PositiveNumber);
  sweep->add_option("--margin", args->margin_deg, "Degrees swept beyond each ROM limit")->check(CLI::NonNegativeNumber);
  sweep->callback([args] {
    const auto system = args->config.empty() ? bus::load_system_config(bus::default_config_path())
                                             : bus::load_system_config(args->config);
    const double gh_step = 0.01;  // rad
    if (args->out.empty()) {
      std::cout << std::setprecision(6);
      write_gh(std::cout, system.exo, gh_step);
      std::cout << '\n';
      write_rom(std::cout, system.exo, args->step_deg, args->margin_deg);
      return;
    }
    std::filesystem::create_directories(args->out);
    std::ofstream gh(std::filesystem::path(args->out) / "gh_displacement.csv");
    std::ofstream rom(std::filesystem::path(args->out) / "rom_sweep.csv");
    gh << std::setprecision(6);
    rom << std::setprecision(6);
    write_gh(gh, system.exo, gh_step);
    write_rom(rom, system.exo, args->step_deg, args->margin_deg);
  });
}

}  // namespace nuexo::cli
