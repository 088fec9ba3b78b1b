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
#include <map>

#include "commands.hpp"
#include "nuexo/datalog/datalog.hpp"

namespace nuexo::cli {
namespace {

struct LogArgs {
  std::string file;
  std::string csv_dir;
};

void inspect(const std::filesystem::path& path) {
  const auto log = log::read_log(path);
  struct Span {
    std::uint64_t first = 0, last = 0;
    std::size_t count = 0;
  };
  std::map<std::uint16_t, Span> spans;
  for (const auto& r : log.records) {
    auto& s = spans[r.stream_id];
    if (s.count == 0) s.first = r.timestamp_us;
    s.last = r.timestamp_us;
    ++s.count;
  }
  std::cout << path.string() << "\n"
            << "  version " << log.version << ", " << log.streams.size() << " streams, " << log.records.size()
            << " records, " << std::filesystem::file_size(path) << " bytes\n";
  std::cout << "  " << std::left << std::setw(4) << "id" << std::setw(16) << "name" << std::right << std::setw(6)
            << "dims" << std::setw(10) << "records" << std::setw(14) << "first_s" << std::setw(14) << "last_s"
            << std::setw(10) << "rate_hz"
            << "  units\n";
  std::cout << std::fixed;
  for (const auto& s : log.streams) {
    const auto span = spans[s.id];
    const double first = static_cast<double>(span.first) * 1e-6;
    const double last = static_cast<double>(span.last) * 1e-6;
    const double rate = span.count > 1 && last > first ? static_cast<double>(span.count - 1) / (last - first) : 0.0;
    std::cout << "  " << std::left << std::setw(4) << s.id << std::setw(16) << s.name << std::right << std::setw(6)
              << s.dims << std::setw(10) << span.count << std::setprecision(3) << std::setw(14) << first
              << std::setw(14) << last << std::setprecision(1) << std::setw(10) << rate << "  " << s.units << "\n";
  }
}

void export_csv(const std::filesystem::path& path, const std::filesystem::path& dir) {
  const auto log = log::read_log(path);
  std::filesystem::create_directories(dir);
  std::map<std::uint16_t, std::ofstream> files;
  for (const auto& s : log.streams) {
    auto& out = files[s.id];
    out.open(dir / (s.name + ".csv"));
    if (!out) throw std::runtime_error("cannot write " + (dir / (s.name + ".csv")).string());
    out << std::setprecision(17) << "timestamp_us";
    for (std::uint16_t i = 0; i < s.dims; ++i) out << ",v" << i;
    out << '\n';
  }
  for (const auto& r : log.records) {
    auto& out = files.at(r.stream_id);
    out << r.timestamp_us;
    for (double v : r.payload) out << ',' << v;
    out << '\n';
  }
  for (const auto& s : log.streams) std::cout << (dir / (s.name + ".csv")).string() << '\n';
}

}  // namespace

void add_log_commands(CLI::App& app) {
  auto* logcmd = app.add_subcommand("log", "Session log tools");
  logcmd->require_subcommand(1);
  auto a = std::make_shared<LogArgs>();

  auto* ins = logcmd->add_subcommand("inspect", "Print the stream directory and record statistics");
  ins->add_option("FILE", a->file)->required()->check(CLI::ExistingFile);
  ins->callback([a] { inspect(a->file); });

  auto* exp = logcmd->add_subcommand("export", "Write one CSV file per stream");
  exp->add_option("FILE", a->file)->required()->check(CLI::ExistingFile);
  exp->add_option("--csv", a->csv_dir, "Output directory")->required();
  exp->callback([a] { export_csv(a->file, a->csv_dir); });
}

}  // namespace nuexo::cli
