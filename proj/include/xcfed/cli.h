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

// Command implementations behind the `xcfed` executable. Exit codes:
// 0 success, 1 runtime failure, 2 usage or config error.

#ifndef XCFED_CLI_H_
#define XCFED_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xcfed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Parameters accepted by `sweep --param`.
const std::vector<std::string>& sweep_parameters();

int cmd_run(const std::filesystem::path& config_path,
            const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& out,
            std::ostream& err);

int cmd_compare(const std::filesystem::path& out_dir,
                const std::vector<std::string>& names, std::ostream& out,
                std::ostream& err);

int cmd_sweep(const std::filesystem::path& config_path, const std::string& parameter,
              const std::vector<std::string>& values,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

int cmd_validate(const std::filesystem::path& config_path, std::ostream& out,
                 std::ostream& err);

}  // namespace xcfed::cli

#endif  // XCFED_CLI_H_
