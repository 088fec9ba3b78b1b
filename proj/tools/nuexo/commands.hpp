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

#include <CLI11.hpp>

namespace nuexo::cli {

void add_kin_commands(CLI::App& app);
void add_ctl_commands(CLI::App& app);
void add_node_commands(CLI::App& app);
void add_log_commands(CLI::App& app);
void add_bench_commands(CLI::App& app);

}  // namespace nuexo::cli
