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

// Run outputs: the per-round metrics CSV, the per-run summary JSON, and the
// strategy comparison table.
//
// Metrics CSV columns: round, eval_loss, eval_accuracy, round_bytes,
// cumulative_bytes, simulated_ms, per_platform_loss_0..N-1. Lines end in
// '\n'; numbers use '.' and shortest round-trip formatting.

#ifndef XCFED_REPORT_H_
#define XCFED_REPORT_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcfed/engine.h"

namespace xcfed {

std::string metrics_csv_header(std::size_t platforms);
void write_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rounds);
// Throws std::invalid_argument on malformed input.
std::vector<RoundMetrics> read_metrics_csv(std::istream& in);

struct RunSummary {
  std::string name;
  std::string strategy;
  std::size_t rounds = 0;
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  std::size_t best_round = 0;
  double final_loss = 0.0;
  std::uint64_t cumulative_bytes = 0;
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  double total_simulated_ms = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config;  // resolved
};

RunSummary summarize(const std::string& name, const RunConfig& config,
                     const RunResult& result);
nlohmann::json to_json(const RunSummary& summary);
// Throws nlohmann::json::exception on missing or mistyped fields.
RunSummary summary_from_json(const nlohmann::json& j);

constexpr double kBytesPerMb = 1e6;
constexpr double kMsPerHour = 3.6e6;

struct CompareRow {
  std::string name;
  double cumulative_mb = 0.0;
  double simulated_hours = 0.0;
  double final_accuracy_pct = 0.0;
  double final_loss = 0.0;
  double best_accuracy_pct = 0.0;
};

CompareRow compare_row(const RunSummary& summary);
std::string render_compare_markdown(std::span<const CompareRow> rows);
void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);

}  // namespace xcfed

#endif  // XCFED_REPORT_H_
