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

#include "xcfed/report.h"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xcfed/config.h"
#include "xcfed/csv.h"

namespace xcfed {

namespace {

constexpr std::size_t kFixedColumns = 6;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string metrics_csv_header(std::size_t platforms) {
  std::string h = "round,eval_loss,eval_accuracy,round_bytes,cumulative_bytes,simulated_ms";
  for (std::size_t i = 0; i < platforms; ++i) {
    h += ",per_platform_loss_" + std::to_string(i);
  }
  return h;
}

void write_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rounds) {
  const std::size_t platforms =
      rounds.empty() ? 0 : rounds.front().per_platform_losses.size();
  out << metrics_csv_header(platforms) << '\n';
  for (const auto& m : rounds) {
    if (m.per_platform_losses.size() != platforms) {
      throw std::invalid_argument("write_metrics_csv: ragged per-platform losses");
    }
    out << m.round << ',' << csv::format_double(m.eval_loss) << ','
        << csv::format_double(m.eval_accuracy) << ',' << m.round_bytes << ','
        << m.cumulative_bytes << ',' << csv::format_double(m.simulated_ms);
    for (double l : m.per_platform_losses) out << ',' << csv::format_double(l);
    out << '\n';
  }
}

std::vector<RoundMetrics> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("metrics csv: missing header");
  const auto header = csv::split(line);
  if (header.size() < kFixedColumns) {
    throw std::invalid_argument("metrics csv: header too short");
  }
  const std::size_t platforms = header.size() - kFixedColumns;
  if (line != metrics_csv_header(platforms)) {
    throw std::invalid_argument("metrics csv: unexpected header");
  }
  std::vector<RoundMetrics> out;
  while (std::getline(in, line)) {
    const auto cells = csv::split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("metrics csv: row " + std::to_string(out.size() + 1) +
                                  " has wrong column count");
    }
    RoundMetrics m;
    m.round = static_cast<std::size_t>(csv::parse_int(cells[0]));
    m.eval_loss = csv::parse_double(cells[1]);
    m.eval_accuracy = csv::parse_double(cells[2]);
    m.round_bytes = static_cast<std::uint64_t>(csv::parse_int(cells[3]));
    m.cumulative_bytes = static_cast<std::uint64_t>(csv::parse_int(cells[4]));
    m.simulated_ms = csv::parse_double(cells[5]);
    for (std::size_t i = 0; i < platforms; ++i) {
      m.per_platform_losses.push_back(csv::parse_double(cells[kFixedColumns + i]));
    }
    out.push_back(std::move(m));
  }
  return out;
}

RunSummary summarize(const std::string& name, const RunConfig& config,
                     const RunResult& result) {
  if (result.rounds.empty()) throw std::invalid_argument("summarize: no rounds");
  RunSummary s;
  s.name = name;
  s.strategy = std::string(strategy_name(config.strategy));
  s.rounds = result.rounds.size();
  const auto& last = result.rounds.back();
  s.final_accuracy = last.eval_accuracy;
  s.final_loss = last.eval_loss;
  s.cumulative_bytes = last.cumulative_bytes;
  s.total_simulated_ms = last.simulated_ms;
  s.upload_bytes = result.upload_bytes;
  s.download_bytes = result.download_bytes;
  // Best is the first round reaching the maximum accuracy.
  for (const auto& m : result.rounds) {
    if (s.best_round == 0 || m.eval_accuracy > s.best_accuracy) {
      s.best_accuracy = m.eval_accuracy;
      s.best_round = m.round;
    }
  }
  s.seed = config.seed;
  s.config = to_json(config);
  return s;
}

nlohmann::json to_json(const RunSummary& s) {
  return {{"name", s.name},
          {"strategy", s.strategy},
          {"rounds", s.rounds},
          {"final_accuracy", s.final_accuracy},
          {"best_accuracy", s.best_accuracy},
          {"best_round", s.best_round},
          {"final_loss", s.final_loss},
          {"cumulative_bytes", s.cumulative_bytes},
          {"upload_bytes", s.upload_bytes},
          {"download_bytes", s.download_bytes},
          {"total_simulated_ms", s.total_simulated_ms},
          {"time_basis", "simulated"},
          {"seed", s.seed},
          {"config", s.config}};
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.name = j.at("name").get<std::string>();
  s.strategy = j.at("strategy").get<std::string>();
  s.rounds = j.at("rounds").get<std::size_t>();
  s.final_accuracy = j.at("final_accuracy").get<double>();
  s.best_accuracy = j.at("best_accuracy").get<double>();
  s.best_round = j.at("best_round").get<std::size_t>();
  s.final_loss = j.at("final_loss").get<double>();
  s.cumulative_bytes = j.at("cumulative_bytes").get<std::uint64_t>();
  s.upload_bytes = j.at("upload_bytes").get<std::uint64_t>();
  s.download_bytes = j.at("download_bytes").get<std::uint64_t>();
  s.total_simulated_ms = j.at("total_simulated_ms").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.config = j.at("config");
  return s;
}

CompareRow compare_row(const RunSummary& s) {
  return {s.name,
          static_cast<double>(s.cumulative_bytes) / kBytesPerMb,
          s.total_simulated_ms / kMsPerHour,
          s.final_accuracy * 100.0,
          s.final_loss,
          s.best_accuracy * 100.0};
}

std::string render_compare_markdown(std::span<const CompareRow> rows) {
  std::ostringstream out;
  out << "Times are simulated, not wall-clock. MB = 10^6 bytes.\n\n";
  out << "| Strategy | Cumulative MB | Simulated Hours | Final Accuracy % | "
         "Final Loss | Best Accuracy % |\n";
  out << "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.name << " | " << fixed(r.cumulative_mb, 6) << " | "
        << fixed(r.simulated_hours, 6) << " | " << fixed(r.final_accuracy_pct, 2)
        << " | " << fixed(r.final_loss, 6) << " | " << fixed(r.best_accuracy_pct, 2)
        << " |\n";
  }
  return out.str();
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows) {
  out << "strategy,cumulative_mb,simulated_hours,final_accuracy_pct,final_loss,"
         "best_accuracy_pct\n";
  for (const auto& r : rows) {
    out << r.name << ',' << csv::format_double(r.cumulative_mb) << ','
        << csv::format_double(r.simulated_hours) << ','
        << csv::format_double(r.final_accuracy_pct) << ','
        << csv::format_double(r.final_loss) << ','
        << csv::format_double(r.best_accuracy_pct) << '\n';
  }
}

}  // namespace xcfed
