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

// Training-run orchestration over a simulated fleet. Synchronous runs use a
// barrier per round; asynchronous runs are driven by upload arrival events
// on a simulated clock. Nothing here reads the wall clock.

#ifndef XCFED_ENGINE_H_
#define XCFED_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "xcfed/aggregate.h"
#include "xcfed/datagen.h"
#include "xcfed/netsim.h"
#include "xcfed/params.h"

namespace xcfed {

struct PlatformSpec {
  int id = 0;
  double compute_rate = 1.0;  // samples per simulated ms
  LinkProfile uplink;
  LinkProfile downlink;
};

struct FleetConfig {
  std::vector<PlatformSpec> platforms;
  PartitionStrategy partition = DirichletPartition{};
  ProtocolProfile protocol = ProtocolProfile::grpc_like();

  std::size_t size() const { return platforms.size(); }
};

struct CompressionSpec {
  double k_fraction = 1.0;
};

struct RunConfig {
  ModelSpec model;
  SyntheticSpec data;
  FleetConfig fleet;
  AggregationStrategy strategy = FedAvgStrategy{};
  std::size_t rounds = 10;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 32;
  double lr = 0.1;
  std::optional<CompressionSpec> compression;
  std::optional<DpSpec> dp;
  double eval_fraction = 0.2;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct RoundMetrics {
  std::size_t round = 0;  // 1-based; merge-event index for async runs
  double eval_loss = 0.0;
  double eval_accuracy = 0.0;
  std::uint64_t round_bytes = 0;
  std::uint64_t cumulative_bytes = 0;
  double simulated_ms = 0.0;
  std::vector<double> per_platform_losses;
};

struct RunResult {
  std::vector<RoundMetrics> rounds;
  ParamVector final_params;
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  std::uint64_t messages = 0;
};

// Optional callbacks for inspecting a run as it progresses.
struct RunObserver {
  // Called with the global model after every aggregation (round index is
  // 1-based) and once with round 0 for the initial model.
  std::function<void(std::size_t round, const ParamVector& global)> on_global;
  // Called with the staleness of every asynchronous merge.
  std::function<void(std::size_t round, int platform, std::size_t staleness)>
      on_merge;
};

struct LocalTrainResult {
  ParamVector params;
  double mean_epoch_loss = 0.0;  // over the final epoch
  Gradient entry_gradient;       // full-shard gradient at the input params
};

// E epochs of minibatch SGD with a seeded reshuffle each epoch.
LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& params,
                             const Batch& shard, std::size_t epochs,
                             std::size_t batch_size, double lr, std::uint64_t seed);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalResult evaluate(const ModelSpec& spec, const ParamVector& params,
                    const Batch& eval_set);

// Requires a fedavg, dynamic-weighted or gradient strategy.
RunResult run_sync(const RunConfig& config, const RunObserver& observer = {});

// Requires an async strategy; one metrics record per merge event.
RunResult run_async(const RunConfig& config, const RunObserver& observer = {});

// Dispatches on the strategy kind.
RunResult run(const RunConfig& config, const RunObserver& observer = {});

// The split used by a run: the last eval_fraction of the generated data is
// held out for evaluation, the rest is partitioned.
struct DataSplit {
  Dataset train;
  Dataset eval;
};
DataSplit split_dataset(const RunConfig& config);

}  // namespace xcfed

#endif  // XCFED_ENGINE_H_
