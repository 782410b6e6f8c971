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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xcfed/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"Cross-cloud federated training simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run every entry of an experiment file");
  run->add_option("config", config_path, "Experiment JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the seed of every entry");

  std::vector<std::string> names;
  auto* compare = app.add_subcommand("compare", "Tabulate finished runs");
  compare->add_option("--out", out_dir, "Directory holding the summaries")->required();
  compare->add_option("names", names, "Entry names, in row order")->required();

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a base config over parameter values");
  sweep->add_option("config", config_path, "Experiment JSON file")->required();
  sweep->add_option("--param", param, "beta, k_fraction, alpha0, lr or local_epochs")
      ->required();
  sweep->add_option("--values", values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check an experiment file");
  validate->add_option("config", config_path, "Experiment JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : xcfed::cli::kExitUsage;
  }

  if (*run) return xcfed::cli::cmd_run(config_path, out_dir, seed, std::cout, std::cerr);
  if (*compare) return xcfed::cli::cmd_compare(out_dir, names, std::cout, std::cerr);
  if (*sweep) {
    return xcfed::cli::cmd_sweep(config_path, param, values, out_dir, std::cout,
                                 std::cerr);
  }
  return xcfed::cli::cmd_validate(config_path, std::cout, std::cerr);
}
