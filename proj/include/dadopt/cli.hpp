// Copyright 2026 The dadopt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DADOPT_CLI_HPP
#define DADOPT_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace dadopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `dadopt` tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker cap from DADOPT_THREADS, or `fallback` when unset or invalid.
unsigned worker_cap_from_env(unsigned fallback);

}  // namespace dadopt

#endif  // DADOPT_CLI_HPP
