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

// Synthetic classification data and the strategies that split it across
// platforms: fixed proportional shards, per-class Dirichlet label skew, and
// throughput-driven rebalancing.

#ifndef XCFED_DATAGEN_H_
#define XCFED_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xcfed/params.h"

namespace xcfed {

struct Dataset {
  Batch samples;
  std::size_t classes = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t features() const { return samples.features.cols; }
};

struct SyntheticSpec {
  std::size_t samples = 1000;
  std::size_t features = 20;
  std::size_t classes = 10;
  double separation = 6.0;  // norm of each class mean
  std::uint64_t seed = 0;

  void validate() const;
};

// Class-conditional unit-covariance Gaussians. Labels are assigned
// round-robin and then shuffled, so class counts differ by at most one.
Dataset generate_synthetic(const SyntheticSpec& spec);

// Rows [begin, end) of a dataset, as a dataset of its own.
Dataset slice(const Dataset& dataset, std::size_t begin, std::size_t end);

// Header row `x0,...,x{F-1},label`, one sample per line.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);
// The class count is max(label) + 1 unless given.
Dataset read_dataset_csv(std::istream& in,
                         std::optional<std::size_t> classes = std::nullopt);

struct PartitionPlan {
  std::vector<std::vector<std::size_t>> shards;

  std::size_t platforms() const { return shards.size(); }
  std::vector<std::size_t> sizes() const;
};

// Empty when the plan is a disjoint, covering, nonempty split of
// [0, total); otherwise a description of the first violation.
std::optional<std::string> find_plan_violation(const PartitionPlan& plan,
                                               std::size_t total);

struct FixedPartition {
  std::vector<double> proportions;
};
struct DirichletPartition {
  double beta = 0.5;
  // Optional size skew; empty means uniform over platforms.
  std::vector<double> proportions;
};
// Starts from an even split and is rebalanced from measured round times.
struct DynamicPartition {
  std::size_t rebalance_every = 1;
};
using PartitionStrategy =
    std::variant<FixedPartition, DirichletPartition, DynamicPartition>;

// Throws std::invalid_argument unless proportions are nonnegative, sum to
// one within 1e-9, and there is one per platform.
void validate_proportions(std::span<const double> proportions,
                          std::size_t platforms);
void validate_partition(const PartitionStrategy& strategy, std::size_t platforms);

// Splits `total` items by `weights` (normalized internally) with largest
// remainder rounding; leftover units go to the largest fractional parts,
// lowest index first on ties.
std::vector<std::size_t> largest_remainder(std::span<const double> weights,
                                           std::size_t total);

PartitionPlan partition_fixed(const Dataset& dataset,
                              std::span<const double> proportions,
                              std::uint64_t seed);

PartitionPlan partition_dirichlet(const Dataset& dataset, std::size_t platforms,
                                  double beta, std::uint64_t seed);

// Concentration for platform i is beta * N * proportions[i], which reduces
// to the symmetric case for uniform proportions.
PartitionPlan partition_dirichlet(const Dataset& dataset,
                                  std::span<const double> proportions,
                                  double beta, std::uint64_t seed);

// New sizes proportional to old_size / round_ms. Donors give up the tail of
// their shard; receivers take from that pool in platform order.
PartitionPlan rebalance_dynamic(const PartitionPlan& plan,
                                std::span<const double> measured_round_ms);

// Dispatches on the strategy. Dynamic plans start from an even split.
PartitionPlan make_partition(const Dataset& dataset,
                             const PartitionStrategy& strategy,
                             std::size_t platforms, std::uint64_t seed);

}  // namespace xcfed

#endif  // XCFED_DATAGEN_H_
