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

// Aggregation rules that fold per-platform results into the global model:
//
//   fedavg             w = sum_i (n_i / n) w_i
//   dynamic-weighted   w = sum_i alpha_i w_i,  alpha = softmax(-L)
//   gradient           w' = w - lr * sum_i (n_i / n) g_i
//   async              w' = w + alpha (w_local - w)
//
// plus staleness-dependent step sizes for the asynchronous rule and a
// Gaussian mechanism (clip, then add noise) for privatizing uploads.

#ifndef XCFED_AGGREGATE_H_
#define XCFED_AGGREGATE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xcfed/params.h"

namespace xcfed {

struct LocalResult {
  ParamVector params;
  std::size_t sample_count = 1;
  double local_loss = 0.0;
  int platform_id = 0;
};

struct DynamicWeights {
  std::vector<double> alphas;
  std::vector<double> source_losses;
};

struct FedAvgStrategy {};
struct DynamicWeightedStrategy {};
struct GradientStrategy {
  double lr = 0.1;
};
struct AsyncStrategy {
  double alpha0 = 0.5;
  double staleness_exponent = 0.0;
};
using AggregationStrategy = std::variant<FedAvgStrategy, DynamicWeightedStrategy,
                                         GradientStrategy, AsyncStrategy>;

std::string_view strategy_name(const AggregationStrategy& strategy);
void validate_strategy(const AggregationStrategy& strategy);
inline bool is_async(const AggregationStrategy& s) {
  return std::holds_alternative<AsyncStrategy>(s);
}

ParamVector fedavg(std::span<const LocalResult> locals);

// Softmax of the negated losses, shifted by the minimum loss for stability.
DynamicWeights dynamic_weights(std::span<const double> losses);

ParamVector dynamic_aggregate(std::span<const LocalResult> locals);

struct WeightedGradient {
  Gradient grad;
  std::size_t sample_count = 1;
};

ParamVector gradient_aggregate(const ParamVector& global,
                               std::span<const WeightedGradient> grads, double lr);

ParamVector async_merge(const ParamVector& global, const ParamVector& local,
                        double alpha);

// alpha0 / (staleness + 1)^p
double staleness_weight(double alpha0, std::size_t staleness, double p);

struct DpSpec {
  double clip_norm = std::numeric_limits<double>::infinity();
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Clips to L2 norm clip_norm, then adds N(0, (sigma * clip_norm)^2) noise to
// every coordinate. The noise stream is a function of (spec.seed,
// call_index). With an infinite clip norm the noise scale is sigma.
template <typename Tag>
DenseVector<Tag> dp_privatize(const DenseVector<Tag>& update, const DpSpec& spec,
                              std::uint64_t call_index);

// Stateful wrapper that numbers successive calls.
class Privatizer {
 public:
  explicit Privatizer(DpSpec spec) : spec_(spec) { spec_.validate(); }

  template <typename Tag>
  DenseVector<Tag> operator()(const DenseVector<Tag>& update) {
    return dp_privatize(update, spec_, calls_++);
  }

  std::uint64_t calls() const { return calls_; }

 private:
  DpSpec spec_;
  std::uint64_t calls_ = 0;
};

namespace internal {
void privatize_in_place(std::span<double> values, const DpSpec& spec,
                        std::uint64_t call_index);
}  // namespace internal

template <typename Tag>
DenseVector<Tag> dp_privatize(const DenseVector<Tag>& update, const DpSpec& spec,
                              std::uint64_t call_index) {
  DenseVector<Tag> out = update;
  internal::privatize_in_place(out.values(), spec, call_index);
  return out;
}

}  // namespace xcfed

#endif  // XCFED_AGGREGATE_H_
