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


#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "commands.hpp"
#include "nuexo/bench/drift.hpp"

namespace nuexo::cli {
namespace {

struct BenchArgs {
  std::uint64_t seeds = 20;
  std::uint64_t first_seed = 1;
  std::string out = "drift";
};

const char* kAxes[3] = {"x", "y", "z"};

void accumulate(bench::SystemStats& sum, const bench::SystemStats& s) {
  for (int a = 0; a < 3; ++a) {
    sum[a].max += s[a].max;
    sum[a].avg += s[a].avg;
    sum[a].static_max += s[a].static_max;
    sum[a].static_avg += s[a].static_avg;
  }
}

void scale(bench::SystemStats& s, double k) {
  for (auto& a : s) {
    a.max *= k;
    a.avg *= k;
    a.static_max *= k;
    a.static_avg *= k;
  }
}

void write_seed_rows(std::ostream& os, std::uint64_t seed, double slip, const bench::DeviationReport& r) {
  for (const auto& [name, stats] : {std::pair{"EXO", &r.exo}, std::pair{"IMC", &r.imc}}) {
    for (int a = 0; a < 3; ++a) {
      const auto& s = (*stats)[a];
      os << seed << ',' << slip << ',' << bench::to_string(r.phase) << ',' << name << ',' << kAxes[a] << ',' << s.max
         << ',' << s.avg << ',' << s.static_max << ',' << s.static_avg << '\n';
    }
  }
}

void run(const BenchArgs& a) {
  const std::filesystem::path out(a.out);
  std::filesystem::create_directories(out);
  std::ofstream seeds(out / "drift_seeds.csv");
  seeds << std::setprecision(9) << "seed,slip_scale,phase,system,axis,max,avg,static_max,static_avg\n";

  bench::DeviationReport start{bench::Phase::start, {}, {}};
  bench::DeviationReport after{bench::Phase::after_perturbation, {}, {}};
  std::vector<std::pair<double, double>> exo_psd, imc_psd;
  const double rate = bench::standard_abduction().rate;
  for (std::uint64_t k = 0; k < a.seeds; ++k) {
    const auto seed = a.first_seed + k;
    const auto r = bench::run_protocol(seed);
    write_seed_rows(seeds, seed, r.slip_scale, r.start);
    write_seed_rows(seeds, seed, r.slip_scale, r.after);
    accumulate(start.exo, r.start.exo);
    accumulate(start.imc, r.start.imc);
    accumulate(after.exo, r.after.exo);
    accumulate(after.imc, r.after.imc);
    const auto e = bench::noise_spectrum(r.exo_error, rate);
    const auto i = bench::noise_spectrum(r.imc_error, rate);
    if (exo_psd.empty()) {
      exo_psd.assign(e.size(), {0.0, 0.0});
      imc_psd.assign(i.size(), {0.0, 0.0});
    }
    for (std::size_t j = 0; j < e.size(); ++j) {
      exo_psd[j] = {e[j].first, exo_psd[j].second + e[j].second};
      imc_psd[j] = {i[j].first, imc_psd[j].second + i[j].second};
    }
  }
  const double inv = 1.0 / static_cast<double>(a.seeds);
  for (auto* s : {&start.exo, &start.imc, &after.exo, &after.imc}) scale(*s, inv);
  bench::write_report_csv(out / "drift_table.csv", {start, after});

  std::ofstream spectrum(out / "noise_spectrum.csv");
  spectrum << std::setprecision(9) << "frequency_hz,exo_psd,imc_psd\n";
  for (std::size_t j = 0; j < exo_psd.size(); ++j) {
    spectrum << exo_psd[j].first << ',' << exo_psd[j].second * inv << ',' << imc_psd[j].second * inv << '\n';
  }

  std::cout << std::fixed << std::setprecision(3) << "mean over " << a.seeds << " seeds, abduction axis (rad)\n"
            << "  phase               system  static_max  static_avg\n";
  for (const auto* r : {&start, &after}) {
    for (const auto& [name, stats] : {std::pair{"EXO", &r->exo}, std::pair{"IMC", &r->imc}}) {
      std::cout << "  " << std::left << std::setw(20) << bench::to_string(r->phase) << std::setw(6) << name
                << std::right << std::setw(12) << (*stats)[1].static_max << std::setw(12) << (*stats)[1].static_avg
                << '\n';
    }
  }
  std::cout << "wrote " << (out / "drift_table.csv").string() << ", " << (out / "drift_seeds.csv").string() << ", "
            << (out / "noise_spectrum.csv").string() << '\n';
}

}  // namespace

void add_bench_commands(CLI::App& app) {
  auto* benchcmd = app.add_subcommand("bench", "Benchmarks");
  benchcmd->require_subcommand(1);
  auto a = std::make_shared<BenchArgs>();
  auto* drift = benchcmd->add_subcommand("drift", "Encoder vs. inertial capture drift under strap slip");
  drift->add_option("--seeds", a->seeds, "Number of seeds")->check(CLI::PositiveNumber);
  drift->add_option("--first-seed", a->first_seed, "First seed");
  drift->add_option("--out", a->out, "Output directory");
  drift->callback([a] { run(*a); });
}

}  // namespace nuexo::cli
