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

#include "xcfed/aggregate.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "oracles.h"
#include "xcfed/datagen.h"
#include "xcfed/rng.h"

namespace xcfed {
namespace {

std::vector<LocalResult> random_locals(Rng& rng, std::size_t count, std::size_t dim) {
  std::vector<LocalResult> out;
  for (std::size_t i = 0; i < count; ++i) {
    ParamVector p(dim);
    for (double& v : p.values()) v = rng.normal();
    out.push_back({p, 1 + rng.below(100), rng.uniform(0.0, 3.0), static_cast<int>(i)});
  }
  return out;
}

TEST(FedAvgTest, Examples) {
  const std::vector<LocalResult> locals{{ParamVector{2.0}, 1, 0.0, 0},
                                        {ParamVector{6.0}, 3, 0.0, 1}};
  EXPECT_EQ(fedavg(locals), ParamVector{5.0});
  const ParamVector same{1.25, -3.0};
  const std::vector<LocalResult> identical{{same, 4, 0.1, 0}, {same, 9, 0.2, 1}};
  const auto avg = fedavg(identical);
  for (std::size_t j = 0; j < same.size(); ++j) EXPECT_NEAR(avg[j], same[j], 1e-15);
  const std::vector<LocalResult> single{{same, 17, 0.3, 0}};
  EXPECT_EQ(fedavg(single), same);
  EXPECT_THROW(fedavg(std::vector<LocalResult>{}), std::invalid_argument);
}

TEST(FedAvgTest, ConvexCombinationAndPermutationInvariance) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    auto locals = random_locals(rng, 1 + rng.below(6), 8);
    const auto avg = fedavg(locals);
    for (std::size_t j = 0; j < avg.size(); ++j) {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& l : locals) {
        lo = std::min(lo, l.params[j]);
        hi = std::max(hi, l.params[j]);
      }
      EXPECT_GE(avg[j], lo - 1e-12);
      EXPECT_LE(avg[j], hi + 1e-12);
    }
    rng.shuffle(locals);
    const auto permuted = fedavg(locals);
    for (std::size_t j = 0; j < avg.size(); ++j) EXPECT_NEAR(avg[j], permuted[j], 1e-12);
  }
}

TEST(DynamicWeightsTest, Examples) {
  const auto half = dynamic_weights(std::vector<double>{0.0, 0.0});
  EXPECT_EQ(half.alphas, (std::vector<double>{0.5, 0.5}));
  const auto skew = dynamic_weights(std::vector<double>{0.0, std::log(3.0)});
  EXPECT_NEAR(skew.alphas[0], 0.75, 1e-15);
  EXPECT_NEAR(skew.alphas[1], 0.25, 1e-15);
  for (double c : {-50.0, 3.7, 1e3}) {
    const auto shifted = dynamic_weights(std::vector<double>{c, c + std::log(3.0)});
    EXPECT_NEAR(shifted.alphas[0], 0.75, 1e-12);
    EXPECT_NEAR(shifted.alphas[1], 0.25, 1e-12);
  }
  EXPECT_EQ(skew.source_losses[1], std::log(3.0));
}

TEST(DynamicWeightsTest, Properties) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> losses(1 + rng.below(8));
    for (double& l : losses) l = rng.uniform(0.0, 10.0);
    const auto w = dynamic_weights(losses);
    EXPECT_NEAR(std::accumulate(w.alphas.begin(), w.alphas.end(), 0.0), 1.0, 1e-12);
    for (double a : w.alphas) EXPECT_GT(a, 0.0);
    EXPECT_EQ(std::max_element(w.alphas.begin(), w.alphas.end()) - w.alphas.begin(),
              std::min_element(losses.begin(), losses.end()) - losses.begin());
    const double c = rng.uniform(-100.0, 100.0);
    std::vector<double> moved = losses;
    for (double& l : moved) l += c;
    const auto w2 = dynamic_weights(moved);
    for (std::size_t i = 0; i < losses.size(); ++i) {
      EXPECT_NEAR(w.alphas[i], w2.alphas[i], 1e-12);
    }
  }
}

TEST(DynamicAggregateTest, Examples) {
  std::vector<LocalResult> equal{{ParamVector{1.0, 4.0}, 1, 0.7, 0},
                                 {ParamVector{3.0, 0.0}, 50, 0.7, 1}};
  const auto mean = dynamic_aggregate(equal);
  EXPECT_NEAR(mean[0], 2.0, 1e-15);
  EXPECT_NEAR(mean[1], 2.0, 1e-15);

  // alpha_2 = e^-20 / (1 + e^-20) < 2.1e-9, so the result sits within
  // 2.1e-9 * |w1 - w2| of w1.
  const ParamVector w1{1.0, -2.0}, w2{5.0, 1.0};
  const std::vector<LocalResult> skew{{w1, 10, 0.0, 0}, {w2, 10, 20.0, 1}};
  const auto out = dynamic_aggregate(skew);
  const double gap = std::hypot(w1[0] - w2[0], w1[1] - w2[1]);
  EXPECT_LE(std::hypot(out[0] - w1[0], out[1] - w1[1]), 2.1e-9 * gap);
  EXPECT_GT(std::hypot(out[0] - w1[0], out[1] - w1[1]), 0.0);

  const std::vector<LocalResult> single{{w2, 3, 1.0, 0}};
  EXPECT_EQ(dynamic_aggregate(single), w2);
  EXPECT_THROW(dynamic_aggregate(std::vector<LocalResult>{}), std::invalid_argument);
}

TEST(GradientAggregateTest, Examples) {
  const ParamVector w{1.0};
  const std::vector<WeightedGradient> grads{{Gradient{2.0}, 1}, {Gradient{-2.0}, 3}};
  EXPECT_EQ(gradient_aggregate(w, grads, 0.5), ParamVector{1.5});
  EXPECT_EQ(gradient_aggregate(w, grads, 0.0), w);
  const ParamVector w3{0.5, -1.0, 2.0};
  const Gradient g3{0.1, 0.2, -0.3};
  const std::vector<WeightedGradient> one{{g3, 42}};
  EXPECT_EQ(gradient_aggregate(w3, one, 0.3), sgd_step(w3, g3, 0.3));
  EXPECT_THROW(gradient_aggregate(w, std::vector<WeightedGradient>{}, 0.1),
               std::invalid_argument);
}

// Full-batch shard gradients combined by n_i/n equal the union gradient, so
// one aggregation step is one centralized GD step.
TEST(GradientAggregateTest, MatchesCentralizedStepOnArbitraryPartition) {
  const auto spec = ModelSpec::logistic(5, 4);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = generate_synthetic({60 + rng.below(60), 5, 4, 2.0, 100u + trial});
    const auto plan = partition_dirichlet(data, 2 + rng.below(4), 0.5, trial);
    const ParamVector w(testing::random_params(spec.parameter_count(), trial, 0.3));
    std::vector<WeightedGradient> grads;
    for (const auto& shard : plan.shards) {
      grads.push_back({backward(spec, w, gather(data.samples, shard)), shard.size()});
    }
    const auto fed = gradient_aggregate(w, grads, 0.7);
    const auto central = testing::logistic_gd(spec, w.raw(), data.samples, 0.7, 1);
    EXPECT_LE(testing::max_abs_diff(fed.raw(), central), 1e-10);
  }
}

TEST(AsyncMergeTest, Examples) {
  const ParamVector g{2.0, -1.0}, l{4.0, 3.0};
  EXPECT_EQ(async_merge(g, l, 0.0), g);
  EXPECT_EQ(async_merge(g, l, 1.0), l);
  EXPECT_EQ(async_merge(ParamVector{2.0}, ParamVector{4.0}, 0.5), ParamVector{3.0});
  EXPECT_THROW(async_merge(g, l, 1.5), std::invalid_argument);
  EXPECT_THROW(async_merge(g, l, -0.1), std::invalid_argument);
  EXPECT_THROW(async_merge(g, ParamVector{1.0}, 0.5), std::invalid_argument);
}

TEST(AsyncMergeTest, StaysBetweenEndpoints) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    ParamVector g(6), l(6);
    for (std::size_t j = 0; j < 6; ++j) {
      g[j] = rng.normal();
      l[j] = rng.normal();
    }
    const auto out = async_merge(g, l, rng.uniform());
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_GE(out[j], std::min(g[j], l[j]) - 1e-15);
      EXPECT_LE(out[j], std::max(g[j], l[j]) + 1e-15);
    }
  }
}

TEST(StalenessWeightTest, Examples) {
  for (double p : {0.0, 0.5, 3.0}) EXPECT_EQ(staleness_weight(0.6, 0, p), 0.6);
  EXPECT_DOUBLE_EQ(staleness_weight(0.6, 1, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(staleness_weight(0.6, 3, 0.5), 0.3);
  EXPECT_EQ(staleness_weight(0.5, 10, 0.0), 0.5);
  EXPECT_THROW(staleness_weight(0.0, 1, 1.0), std::invalid_argument);
}

TEST(DpPrivatizeTest, NoOpSpecIsIdentity) {
  const ParamVector p{1.0, -2.0, 1e3};
  EXPECT_EQ(dp_privatize(p, DpSpec{}, 0), p);
}

TEST(DpPrivatizeTest, ClipsToNorm) {
  const Gradient g{6.0, 8.0};  // norm 10
  const DpSpec spec{5.0, 0.0, 1};
  EXPECT_EQ(dp_privatize(g, spec, 0), (Gradient{3.0, 4.0}));
  const Gradient small{0.3, 0.4};
  EXPECT_EQ(dp_privatize(small, spec, 0), small);
}

TEST(DpPrivatizeTest, NeverIncreasesNormWithoutNoise) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Gradient g(5);
    for (double& v : g.values()) v = 10.0 * rng.normal();
    const DpSpec spec{rng.uniform(0.1, 20.0), 0.0, 0};
    EXPECT_LE(dp_privatize(g, spec, trial).l2_norm(), g.l2_norm() * (1 + 1e-15));
  }
}

TEST(DpPrivatizeTest, NoiseIsCenteredAndDeterministic) {
  const DpSpec spec{1.0, 1.0, 77};
  const std::size_t dim = 3;
  std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    const auto out = dp_privatize(Gradient(dim), spec, static_cast<std::uint64_t>(k));
    for (std::size_t j = 0; j < dim; ++j) {
      mean[j] += out[j] / draws;
      sq[j] += out[j] * out[j] / draws;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    EXPECT_LE(std::abs(mean[j]), 4.0 / std::sqrt(static_cast<double>(draws)));
    EXPECT_NEAR(sq[j], 1.0, 0.05);
  }
  EXPECT_EQ(dp_privatize(Gradient(dim), spec, 5), dp_privatize(Gradient(dim), spec, 5));
  EXPECT_NE(dp_privatize(Gradient(dim), spec, 5), dp_privatize(Gradient(dim), spec, 6));

  Privatizer a(spec), b(spec);
  EXPECT_EQ(a(Gradient(dim)), b(Gradient(dim)));
  EXPECT_EQ(a.calls(), 1u);
  EXPECT_EQ(a(Gradient(dim)), dp_privatize(Gradient(dim), spec, 1));
}

TEST(StrategyTest, NamesAndValidation) {
  EXPECT_EQ(strategy_name(FedAvgStrategy{}), "fedavg");
  EXPECT_EQ(strategy_name(DynamicWeightedStrategy{}), "dynamic-weighted");
  EXPECT_EQ(strategy_name(GradientStrategy{0.1}), "gradient");
  EXPECT_EQ(strategy_name(AsyncStrategy{}), "async");
  EXPECT_THROW(validate_strategy(GradientStrategy{0.0}), std::invalid_argument);
  EXPECT_THROW(validate_strategy(AsyncStrategy{1.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate_strategy(AsyncStrategy{0.5, -1.0}), std::invalid_argument);
  EXPECT_NO_THROW(validate_strategy(AsyncStrategy{1.0, 2.0}));
}

}  // namespace
}  // namespace xcfed
