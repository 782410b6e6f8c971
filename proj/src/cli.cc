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

#include "xcfed/cli.h"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xcfed/config.h"
#include "xcfed/csv.h"
#include "xcfed/engine.h"
#include "xcfed/report.h"

namespace xcfed::cli {

namespace fs = std::filesystem;

namespace {

fs::path metrics_path(const fs::path& dir, const std::string& name) {
  return dir / (name + ".metrics.csv");
}
fs::path summary_path(const fs::path& dir, const std::string& name) {
  return dir / (name + ".summary.json");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// Runs one entry and writes its metrics and summary files.
RunSummary execute(const NamedRun& entry, const fs::path& out_dir, std::ostream& out) {
  const RunResult result = run(entry.config);
  std::ostringstream metrics;
  write_metrics_csv(metrics, result.rounds);
  write_file(metrics_path(out_dir, entry.name), metrics.str());
  RunSummary summary = summarize(entry.name, entry.config, result);
  write_file(summary_path(out_dir, entry.name), to_json(summary).dump(2) + "\n");
  out << entry.name << ": " << summary.rounds << " rounds, final accuracy "
      << csv::format_double(summary.final_accuracy) << ", "
      << summary.cumulative_bytes << " bytes\n";
  return summary;
}

std::optional<ExperimentFile> load_or_report(const fs::path& config_path,
                                             std::optional<std::uint64_t> seed,
                                             std::ostream& err) {
  if (!fs::is_regular_file(config_path)) {
    err << "error: config file '" << config_path.string() << "' not found\n";
    return std::nullopt;
  }
  try {
    return load_experiment(config_path, seed);
  } catch (const ConfigError& e) {
    err << "error: invalid config: " << e.what() << '\n';
    return std::nullopt;
  }
}

void apply_sweep_value(RunConfig& config, const std::string& parameter,
                       const std::string& value) {
  double v = 0.0;
  try {
    v = csv::parse_double(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError(parameter + ": sweep value '" + value + "' is not a number");
  }
  if (parameter == "beta") {
    auto* d = std::get_if<DirichletPartition>(&config.fleet.partition);
    if (d == nullptr) throw ConfigError("beta: sweep requires a dirichlet partition");
    d->beta = v;
  } else if (parameter == "k_fraction") {
    config.compression = CompressionSpec{v};
  } else if (parameter == "alpha0") {
    auto* a = std::get_if<AsyncStrategy>(&config.strategy);
    if (a == nullptr) throw ConfigError("alpha0: sweep requires the async strategy");
    a->alpha0 = v;
  } else if (parameter == "lr") {
    config.lr = v;
  } else if (parameter == "local_epochs") {
    if (v != static_cast<double>(static_cast<std::size_t>(v)) || v < 1) {
      throw ConfigError("local_epochs: sweep value '" + value + "' is not a positive integer");
    }
    config.local_epochs = static_cast<std::size_t>(v);
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(parameter + "=" + value + ": " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> kParams = {"beta", "k_fraction", "alpha0", "lr",
                                                   "local_epochs"};
  return kParams;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& out,
            std::ostream& err) {
  const auto experiment = load_or_report(config_path, seed_override, err);
  if (!experiment) return kExitUsage;
  try {
    fs::create_directories(out_dir);
    for (const auto& entry : experiment->entries) execute(entry, out_dir, out);
  } catch (const std::exception& e) {
    err << "error: run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_compare(const fs::path& out_dir, const std::vector<std::string>& names,
                std::ostream& out, std::ostream& err) {
  if (names.empty()) {
    err << "error: compare needs at least one entry name\n";
    return kExitUsage;
  }
  std::vector<CompareRow> rows;
  for (const auto& name : names) {
    const fs::path path = summary_path(out_dir, name);
    std::ifstream in(path);
    if (!in) {
      err << "error: missing summary for '" << name << "' (" << path.string() << ")\n";
      return kExitUsage;
    }
    try {
      rows.push_back(compare_row(summary_from_json(nlohmann::json::parse(in))));
    } catch (const nlohmann::json::exception& e) {
      err << "error: malformed summary for '" << name << "': " << e.what() << '\n';
      return kExitUsage;
    }
  }
  try {
    std::ostringstream csv_out;
    write_compare_csv(csv_out, rows);
    write_file(out_dir / "compare.csv", csv_out.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << render_compare_markdown(rows);
  return kExitOk;
}

int cmd_sweep(const fs::path& config_path, const std::string& parameter,
              const std::vector<std::string>& values, const fs::path& out_dir,
              std::ostream& out, std::ostream& err) {
  const auto& allowed = sweep_parameters();
  if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end()) {
    err << "error: unknown sweep parameter '" << parameter << "'; allowed:";
    for (const auto& p : allowed) err << ' ' << p;
    err << '\n';
    return kExitUsage;
  }
  if (values.empty()) {
    err << "error: sweep needs at least one value\n";
    return kExitUsage;
  }
  const auto experiment = load_or_report(config_path, std::nullopt, err);
  if (!experiment) return kExitUsage;

  std::vector<NamedRun> runs;
  try {
    for (const auto& entry : experiment->entries) {
      for (const auto& value : values) {
        NamedRun clone = entry;
        clone.name = entry.name + "-" + parameter + "-" + value;
        apply_sweep_value(clone.config, parameter, value);
        runs.push_back(std::move(clone));
      }
    }
  } catch (const ConfigError& e) {
    err << "error: invalid sweep: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<std::string> names;
  try {
    fs::create_directories(out_dir);
    for (const auto& r : runs) {
      execute(r, out_dir, out);
      names.push_back(r.name);
    }
  } catch (const std::exception& e) {
    err << "error: run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << '\n';
  return cmd_compare(out_dir, names, out, err);
}

int cmd_validate(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  const auto experiment = load_or_report(config_path, std::nullopt, err);
  if (!experiment) return kExitUsage;
  out << "ok: " << experiment->entries.size() << " entr"
      << (experiment->entries.size() == 1 ? "y" : "ies") << " (schema version "
      << experiment->version << ")\n";
  return kExitOk;
}

}  // namespace xcfed::cli
