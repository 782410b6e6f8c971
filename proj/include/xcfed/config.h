/*
 * Copyright 2026 The xcfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment files: a versioned JSON document holding shared defaults and
// one or more named run entries. Each entry is merge-patched over the
// defaults (RFC 7386) and then parsed strictly: unknown keys and type
// mismatches are reported with their dotted path.

#ifndef XCFED_CONFIG_H_
#define XCFED_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcfed/engine.h"

namespace xcfed {

inline constexpr const char* kSchemaVersion = "1";

// Raised for any schema or value problem in a config document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedRun {
  std::string name;
  RunConfig config;
};

struct ExperimentFile {
  std::string version;
  std::vector<NamedRun> entries;
};

// Throws ConfigError. A seed override replaces every entry's seed before
// derived seeds (data, dp) are resolved.
ExperimentFile parse_experiment(const nlohmann::json& doc,
                                std::optional<std::uint64_t> seed_override = {});

// Throws ConfigError for unreadable files and malformed JSON as well;
// callers that need to tell a missing file apart check existence first.
ExperimentFile load_experiment(const std::filesystem::path& path,
                               std::optional<std::uint64_t> seed_override = {});

RunConfig parse_run_config(const nlohmann::json& entry);

// Fully explicit form of a config; parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

}  // namespace xcfed

#endif  // XCFED_CONFIG_H_
