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

#include "xcfed/datagen.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "xcfed/csv.h"
#include "xcfed/rng.h"

namespace xcfed {

namespace {

constexpr std::uint64_t kMeansStream = 1;
constexpr std::uint64_t kLabelStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  for (;;) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& x : v) x /= norm;
    return v;
  }
}

// Greedy Gram-Schmidt: each new direction is orthogonalized against the
// ones already accepted. Redraws if the remainder is numerically zero.
std::vector<std::vector<double>> class_directions(const SyntheticSpec& spec) {
  Rng rng(derive_seed(spec.seed, kMeansStream));
  const bool orthogonal = spec.features >= spec.classes;
  std::vector<std::vector<double>> dirs;
  while (dirs.size() < spec.classes) {
    std::vector<double> v = random_unit(rng, spec.features);
    if (orthogonal) {
      for (const auto& d : dirs) {
        double dot = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * d[j];
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= dot * d[j];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-6) continue;
      for (double& x : v) x /= norm;
    }
    dirs.push_back(std::move(v));
  }
  return dirs;
}

void repair_empty_shards(PartitionPlan& plan) {
  for (std::size_t i = 0; i < plan.shards.size(); ++i) {
    if (!plan.shards[i].empty()) continue;
    std::size_t largest = 0;
    for (std::size_t k = 1; k < plan.shards.size(); ++k) {
      if (plan.shards[k].size() > plan.shards[largest].size()) largest = k;
    }
    if (plan.shards[largest].size() < 2) {
      throw std::invalid_argument("partition: fewer samples than platforms");
    }
    plan.shards[i].push_back(plan.shards[largest].back());
    plan.shards[largest].pop_back();
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  return idx;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (samples < 1) throw std::invalid_argument("data.samples must be positive");
  if (features < 1) throw std::invalid_argument("data.features must be positive");
  if (classes < 2) throw std::invalid_argument("data.classes must be at least 2");
  if (samples < classes) {
    throw std::invalid_argument("data.samples must be at least data.classes");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("data.separation must be nonnegative");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto dirs = class_directions(spec);

  std::vector<int> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    labels[i] = static_cast<int>(i % spec.classes);
  }
  Rng label_rng(derive_seed(spec.seed, kLabelStream));
  label_rng.shuffle(labels);

  Dataset out;
  out.classes = spec.classes;
  out.samples.features = Matrix(spec.samples, spec.features);
  Rng noise(derive_seed(spec.seed, kNoiseStream));
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const auto& mean = dirs[static_cast<std::size_t>(labels[i])];
    auto row = out.samples.features.row(i);
    for (std::size_t j = 0; j < spec.features; ++j) {
      row[j] = spec.separation * mean[j] + noise.normal();
    }
  }
  out.samples.labels = std::move(labels);
  return out;
}

Dataset slice(const Dataset& dataset, std::size_t begin, std::size_t end) {
  if (begin > end || end > dataset.size()) {
    throw std::out_of_range("slice: bad range");
  }
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return Dataset{gather(dataset.samples, rows), dataset.classes};
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  const std::size_t f = dataset.features();
  for (std::size_t j = 0; j < f; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.samples.features.row(i)) {
      out << csv::format_double(v) << ',';
    }
    out << dataset.samples.labels[i] << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, std::optional<std::size_t> classes) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset csv: missing header");
  const auto header = csv::split(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::invalid_argument("dataset csv: last header column must be 'label'");
  }
  const std::size_t f = header.size() - 1;
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != f + 1) {
      throw std::invalid_argument("dataset csv: row " +
                                  std::to_string(labels.size() + 1) +
                                  " has wrong column count");
    }
    for (std::size_t j = 0; j < f; ++j) values.push_back(csv::parse_double(cells[j]));
    const auto y = csv::parse_int(cells[f]);
    if (y < 0) throw std::invalid_argument("dataset csv: negative label");
    labels.push_back(static_cast<int>(y));
  }
  if (labels.empty()) throw std::invalid_argument("dataset csv: no rows");
  Dataset out;
  out.samples.features.rows = labels.size();
  out.samples.features.cols = f;
  out.samples.features.data = std::move(values);
  const int max_label = *std::max_element(labels.begin(), labels.end());
  out.classes = classes.value_or(static_cast<std::size_t>(max_label) + 1);
  if (static_cast<std::size_t>(max_label) >= out.classes) {
    throw std::invalid_argument("dataset csv: label exceeds class count");
  }
  out.samples.labels = std::move(labels);
  return out;
}

std::vector<std::size_t> PartitionPlan::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(shards.size());
  for (const auto& s : shards) out.push_back(s.size());
  return out;
}

std::optional<std::string> find_plan_violation(const PartitionPlan& plan,
                                               std::size_t total) {
  if (plan.shards.empty()) return "plan has no shards";
  std::vector<char> seen(total, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < plan.shards.size(); ++i) {
    if (plan.shards[i].empty()) return "shard " + std::to_string(i) + " is empty";
    for (std::size_t idx : plan.shards[i]) {
      if (idx >= total) {
        return "shard " + std::to_string(i) + " holds out-of-range index " +
               std::to_string(idx);
      }
      if (seen[idx]) return "index " + std::to_string(idx) + " assigned twice";
      seen[idx] = 1;
      ++count;
    }
  }
  if (count != total) {
    return "plan covers " + std::to_string(count) + " of " +
           std::to_string(total) + " indices";
  }
  return std::nullopt;
}

void validate_proportions(std::span<const double> proportions,
                          std::size_t platforms) {
  if (proportions.size() != platforms) {
    throw std::invalid_argument("partition.proportions must have one entry per platform");
  }
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("partition.proportions must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("partition.proportions must sum to 1");
  }
}

void validate_partition(const PartitionStrategy& strategy, std::size_t platforms) {
  if (platforms < 1) throw std::invalid_argument("fleet needs at least one platform");
  if (const auto* f = std::get_if<FixedPartition>(&strategy)) {
    validate_proportions(f->proportions, platforms);
  } else if (const auto* d = std::get_if<DirichletPartition>(&strategy)) {
    if (!(d->beta > 0.0) || !std::isfinite(d->beta)) {
      throw std::invalid_argument("partition.beta must be positive");
    }
    if (!d->proportions.empty()) validate_proportions(d->proportions, platforms);
  } else if (std::get<DynamicPartition>(strategy).rebalance_every < 1) {
    throw std::invalid_argument("partition.rebalance_every must be positive");
  }
}

std::vector<std::size_t> largest_remainder(std::span<const double> weights,
                                           std::size_t total) {
  if (weights.empty()) throw std::invalid_argument("largest_remainder: no weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("largest_remainder: weights must be nonnegative");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("largest_remainder: zero total weight");

  std::vector<std::size_t> out(weights.size());
  std::vector<double> frac(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double quota = weights[i] / sum * static_cast<double>(total);
    // Snap quotas that are integral up to rounding noise.
    const double nearest = std::round(quota);
    if (std::abs(quota - nearest) < 1e-9 * std::max(1.0, quota)) quota = nearest;
    const double fl = std::floor(quota);
    out[i] = static_cast<std::size_t>(fl);
    frac[i] = quota - fl;
    assigned += out[i];
  }
  // Floating error can overshoot by a unit in pathological inputs.
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

PartitionPlan partition_fixed(const Dataset& dataset,
                              std::span<const double> proportions,
                              std::uint64_t seed) {
  if (dataset.size() == 0) throw std::invalid_argument("partition_fixed: empty dataset");
  validate_proportions(proportions, proportions.size());
  const auto sizes = largest_remainder(proportions, dataset.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) {
      throw std::invalid_argument("partition_fixed: platform " + std::to_string(i) +
                                  " would receive no samples");
    }
  }
  const auto idx = shuffled_indices(dataset.size(), derive_seed(seed, 0xf1));
  PartitionPlan plan;
  plan.shards.resize(sizes.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    plan.shards[i].assign(idx.begin() + static_cast<std::ptrdiff_t>(cursor),
                          idx.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[i]));
    cursor += sizes[i];
  }
  return plan;
}

PartitionPlan partition_dirichlet(const Dataset& dataset, std::size_t platforms,
                                  double beta, std::uint64_t seed) {
  if (platforms < 1) throw std::invalid_argument("partition_dirichlet: no platforms");
  const std::vector<double> uniform(platforms, 1.0 / static_cast<double>(platforms));
  return partition_dirichlet(dataset, uniform, beta, seed);
}

PartitionPlan partition_dirichlet(const Dataset& dataset,
                                  std::span<const double> proportions,
                                  double beta, std::uint64_t seed) {
  const std::size_t platforms = proportions.size();
  if (platforms < 1) throw std::invalid_argument("partition_dirichlet: no platforms");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("partition_dirichlet: beta must be positive");
  }
  validate_proportions(proportions, platforms);
  if (dataset.size() < platforms) {
    throw std::invalid_argument("partition_dirichlet: fewer samples than platforms");
  }

  PartitionPlan plan;
  plan.shards.resize(platforms);
  if (platforms == 1) {
    plan.shards[0].resize(dataset.size());
    std::iota(plan.shards[0].begin(), plan.shards[0].end(), std::size_t{0});
    return plan;
  }

  std::vector<std::vector<std::size_t>> by_class(dataset.classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.samples.labels[i])].push_back(i);
  }
  std::vector<double> concentration(platforms);
  for (std::size_t k = 0; k < platforms; ++k) {
    concentration[k] = std::max(beta * static_cast<double>(platforms) * proportions[k],
                                1e-12);
  }
  Rng rng(derive_seed(seed, 0xd1));
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto share = rng.dirichlet(concentration);
    const auto counts = largest_remainder(share, members.size());
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < platforms; ++k) {
      for (std::size_t n = 0; n < counts[k]; ++n) {
        plan.shards[k].push_back(members[cursor++]);
      }
    }
  }
  repair_empty_shards(plan);
  return plan;
}

PartitionPlan rebalance_dynamic(const PartitionPlan& plan,
                                std::span<const double> measured_round_ms) {
  const std::size_t n = plan.platforms();
  if (measured_round_ms.size() != n) {
    throw std::invalid_argument("rebalance_dynamic: expected " + std::to_string(n) +
                                " measurements, got " +
                                std::to_string(measured_round_ms.size()));
  }
  std::vector<double> throughput(n);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ms = measured_round_ms[i];
    if (!(ms > 0.0) || !std::isfinite(ms)) {
      throw std::invalid_argument("rebalance_dynamic: round times must be positive");
    }
    throughput[i] = static_cast<double>(plan.shards[i].size()) / ms;
    total += plan.shards[i].size();
  }
  if (total < n) throw std::invalid_argument("rebalance_dynamic: fewer samples than platforms");

  auto target = largest_remainder(throughput, total);
  for (std::size_t i = 0; i < n; ++i) {
    if (target[i] > 0) continue;
    auto largest = std::max_element(target.begin(), target.end());
    --*largest;
    target[i] = 1;
  }

  PartitionPlan out = plan;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    auto& shard = out.shards[i];
    if (shard.size() <= target[i]) continue;
    pool.insert(pool.end(), shard.begin() + static_cast<std::ptrdiff_t>(target[i]),
                shard.end());
    shard.resize(target[i]);
  }
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& shard = out.shards[i];
    while (shard.size() < target[i]) shard.push_back(pool[cursor++]);
  }
  return out;
}

PartitionPlan make_partition(const Dataset& dataset,
                             const PartitionStrategy& strategy,
                             std::size_t platforms, std::uint64_t seed) {
  validate_partition(strategy, platforms);
  if (const auto* f = std::get_if<FixedPartition>(&strategy)) {
    return partition_fixed(dataset, f->proportions, seed);
  }
  if (const auto* d = std::get_if<DirichletPartition>(&strategy)) {
    if (d->proportions.empty()) {
      return partition_dirichlet(dataset, platforms, d->beta, seed);
    }
    return partition_dirichlet(dataset, d->proportions, d->beta, seed);
  }
  const std::vector<double> even(platforms, 1.0 / static_cast<double>(platforms));
  return partition_fixed(dataset, even, seed);
}

}  // namespace xcfed
