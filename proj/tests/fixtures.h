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

#ifndef XCFED_TESTS_FIXTURES_H_
#define XCFED_TESTS_FIXTURES_H_

#include <vector>

#include "xcfed/engine.h"
#include "xcfed/rng.h"

namespace xcfed::testing {

inline PlatformSpec platform(int id, double compute_rate, double latency_ms = 50.0,
                             double bandwidth = 1000.0) {
  return {id, compute_rate, {latency_ms, bandwidth}, {latency_ms, bandwidth}};
}

inline FleetConfig fleet(const std::vector<double>& rates, PartitionStrategy partition) {
  FleetConfig f;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    f.platforms.push_back(platform(static_cast<int>(i), rates[i]));
  }
  f.partition = std::move(partition);
  f.protocol = ProtocolProfile::grpc_like();
  return f;
}

// Desk-scale benchmark: 10-class synthetic data (5000 samples, 20
// features, separation 6), three platforms with compute rates 4:2:1 on a
// quic-like protocol, Dirichlet(0.3) label skew, T=100, E=2, lr=0.1.
inline RunConfig benchmark_config(AggregationStrategy strategy, std::uint64_t seed) {
  RunConfig c;
  c.data = {5000, 20, 10, 6.0, derive_seed(seed, 0xda7a)};  // as the config loader
  c.model = ModelSpec::logistic(20, 10);
  c.fleet = fleet({4.0, 2.0, 1.0}, DirichletPartition{0.3, {}});
  c.fleet.protocol = ProtocolProfile::quic_like();
  c.strategy = strategy;
  c.rounds = 100;
  c.local_epochs = 2;
  c.batch_size = 32;
  c.lr = 0.1;
  c.eval_fraction = 0.2;
  c.seed = seed;
  return c;
}

// Small, fast config for unit tests.
inline RunConfig small_config(AggregationStrategy strategy, std::size_t platforms = 3,
                              std::uint64_t seed = 1) {
  RunConfig c;
  c.data = {300, 5, 3, 3.0, seed};
  c.model = ModelSpec::logistic(5, 3);
  std::vector<double> rates;
  for (std::size_t i = 0; i < platforms; ++i) rates.push_back(1.0 + static_cast<double>(i));
  c.fleet = fleet(rates, DirichletPartition{0.5, {}});
  c.strategy = strategy;
  c.rounds = 8;
  c.local_epochs = 1;
  c.batch_size = 16;
  c.lr = 0.1;
  c.eval_fraction = 0.2;
  c.seed = seed;
  return c;
}

}  // namespace xcfed::testing

#endif  // XCFED_TESTS_FIXTURES_H_
