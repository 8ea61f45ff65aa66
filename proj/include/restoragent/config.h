// Copyright 2026 The Restoragent Authors.
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

#ifndef RESTORAGENT_CONFIG_H_
#define RESTORAGENT_CONFIG_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "restoragent/grpo.h"
#include "restoragent/iqa.h"
#include "restoragent/orchestrator.h"
#include "restoragent/tools.h"

namespace restoragent::config {

// Parses the TOML subset used by configuration files into JSON: comments,
// [tables], [[arrays of tables]], bare/quoted/dotted keys, basic and literal
// strings, integers, floats, booleans, arrays (may span lines) and inline
// tables. Redefining a key is an error. Throws kConfig naming the line.
nlohmann::json ParseToml(std::string_view text);

// JSON when the extension is .json, the TOML subset otherwise. Throws kIo
// when the file cannot be read and kConfig on a syntax error.
nlohmann::json ReadConfigFile(const std::filesystem::path& path);

struct Backends {
  std::optional<std::string> embed_url;
  int embed_dim = 256;
  std::optional<std::string> complete_url;
  int timeout_ms = 10000;
};

// Environment variables that override the endpoint settings.
inline constexpr std::string_view kEmbedUrlEnv = "RESTORAGENT_EMBED_URL";
inline constexpr std::string_view kCompleteUrlEnv = "RESTORAGENT_COMPLETE_URL";

struct AppConfig {
  std::optional<std::filesystem::path> bank_path;
  // Registry description in the RegistryFromJson schema; unset means the
  // default builtins.
  std::optional<nlohmann::json> registry;
  Backends backends;
  orchestrator::OrchestratorConfig orchestrator;
  orchestrator::PerceptionThresholds thresholds;
  grpo::GrpoConfig grpo;
  iqa::MetricWeights metric_weights = iqa::DefaultWeights();
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

// Reads the process environment.
std::optional<std::string> ProcessEnv(std::string_view name);

// Validates every section; unknown keys are rejected. Relative paths
// (bank_path, a registry given as a file name) resolve against base_dir.
// Throws kConfig.
AppConfig AppConfigFromJson(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const EnvLookup& env = ProcessEnv);

// Defaults plus environment overrides when `path` is unset.
AppConfig LoadAppConfig(const std::optional<std::filesystem::path>& path,
                        const EnvLookup& env = ProcessEnv);

}  // namespace restoragent::config

#endif  // RESTORAGENT_CONFIG_H_
