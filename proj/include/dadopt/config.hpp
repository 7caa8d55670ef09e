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

#ifndef DADOPT_CONFIG_HPP
#define DADOPT_CONFIG_HPP

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dadopt/simulator.hpp"

namespace dadopt {

/// Malformed or schema-violating configuration. `key()` is the dotted path
/// ("optimizer.alpha") when the problem is tied to one key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigKey {
  std::string_view section;
  std::string_view key;
  std::string_view type;
  std::string_view default_value;  // empty for required keys
  std::string_view help;
};

/// Every key a config file may contain, in documentation order.
const std::vector<ConfigKey>& config_schema();

/// Parses the flat sectioned key/value format:
///
///   # comment
///   [optimizer]
///   name = "damsgrad"
///   alpha = 0.001
///
/// Strings may be quoted or bare; booleans are true/false. Unknown sections
/// or keys, duplicates and missing required keys (optimizer.name,
/// optimizer.alpha) are errors. Relative graph.edges_file paths resolve
/// against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Applies one "section.key=value" override on top of a parsed config.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// Human-readable key table for --help.
std::string config_schema_help();

}  // namespace dadopt

#endif  // DADOPT_CONFIG_HPP
