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
#include <stdexcept>

#include "xcfed/rng.h"

namespace xcfed {

namespace {

// Indices of `locals` sorted by platform id; summation follows this order.
std::vector<std::size_t> platform_order(std::span<const LocalResult> locals) {
  std::vector<std::size_t> order(locals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return locals[a].platform_id < locals[b].platform_id;
  });
  return order;
}

ParamVector weighted_params(std::span<const LocalResult> locals,
                            const std::vector<double>& weights,
                            const std::vector<std::size_t>& order) {
  std::vector<double> w;
  std::vector<ParamVector> v;
  w.reserve(order.size());
  v.reserve(order.size());
  for (std::size_t i : order) {
    w.push_back(weights[i]);
    v.push_back(locals[i].params);
  }
  return combine(w, v);
}

}  // namespace

std::string_view strategy_name(const AggregationStrategy& strategy) {
  struct {
    std::string_view operator()(const FedAvgStrategy&) const { return "fedavg"; }
    std::string_view operator()(const DynamicWeightedStrategy&) const {
      return "dynamic-weighted";
    }
    std::string_view operator()(const GradientStrategy&) const { return "gradient"; }
    std::string_view operator()(const AsyncStrategy&) const { return "async"; }
  } visitor;
  return std::visit(visitor, strategy);
}

void validate_strategy(const AggregationStrategy& strategy) {
  if (const auto* g = std::get_if<GradientStrategy>(&strategy)) {
    if (!(g->lr > 0.0) || !std::isfinite(g->lr)) {
      throw std::invalid_argument("strategy.lr must be positive");
    }
  } else if (const auto* a = std::get_if<AsyncStrategy>(&strategy)) {
    if (!(a->alpha0 > 0.0) || !(a->alpha0 <= 1.0)) {
      throw std::invalid_argument("strategy.alpha0 must be in (0, 1]");
    }
    if (!(a->staleness_exponent >= 0.0) || !std::isfinite(a->staleness_exponent)) {
      throw std::invalid_argument("strategy.staleness_exponent must be nonnegative");
    }
  }
}

ParamVector fedavg(std::span<const LocalResult> locals) {
  if (locals.empty()) throw std::invalid_argument("fedavg: no local results");
  const auto order = platform_order(locals);
  double n = 0.0;
  for (std::size_t i : order) {
    if (locals[i].sample_count < 1) {
      throw std::invalid_argument("fedavg: sample_count must be positive");
    }
    n += static_cast<double>(locals[i].sample_count);
  }
  std::vector<double> weights(locals.size());
  for (std::size_t i = 0; i < locals.size(); ++i) {
    weights[i] = static_cast<double>(locals[i].sample_count) / n;
  }
  return weighted_params(locals, weights, order);
}

DynamicWeights dynamic_weights(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("dynamic_weights: no losses");
  for (double l : losses) {
    if (!std::isfinite(l)) throw std::invalid_argument("dynamic_weights: non-finite loss");
  }
  const double shift = *std::min_element(losses.begin(), losses.end());
  DynamicWeights out;
  out.source_losses.assign(losses.begin(), losses.end());
  out.alphas.resize(losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out.alphas[i] = std::exp(-(losses[i] - shift));
    total += out.alphas[i];
  }
  for (double& a : out.alphas) a /= total;
  return out;
}

ParamVector dynamic_aggregate(std::span<const LocalResult> locals) {
  if (locals.empty()) throw std::invalid_argument("dynamic_aggregate: no local results");
  const auto order = platform_order(locals);
  std::vector<double> losses;
  losses.reserve(order.size());
  for (std::size_t i : order) losses.push_back(locals[i].local_loss);
  const auto dw = dynamic_weights(losses);
  std::vector<double> weights(locals.size());
  for (std::size_t k = 0; k < order.size(); ++k) weights[order[k]] = dw.alphas[k];
  return weighted_params(locals, weights, order);
}

ParamVector gradient_aggregate(const ParamVector& global,
                               std::span<const WeightedGradient> grads, double lr) {
  if (grads.empty()) throw std::invalid_argument("gradient_aggregate: no gradients");
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("gradient_aggregate: lr must be nonnegative");
  }
  double n = 0.0;
  for (const auto& g : grads) {
    if (g.sample_count < 1) {
      throw std::invalid_argument("gradient_aggregate: sample_count must be positive");
    }
    if (g.grad.size() != global.size()) {
      throw std::invalid_argument("gradient_aggregate: dimension mismatch");
    }
    n += static_cast<double>(g.sample_count);
  }
  std::vector<double> weights;
  std::vector<Gradient> vectors;
  for (const auto& g : grads) {
    weights.push_back(static_cast<double>(g.sample_count) / n);
    vectors.push_back(g.grad);
  }
  return sgd_step(global, combine(weights, vectors), lr);
}

ParamVector async_merge(const ParamVector& global, const ParamVector& local,
                        double alpha) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0)) {
    throw std::invalid_argument("async_merge: alpha must be in [0, 1]");
  }
  if (global.size() != local.size()) {
    throw std::invalid_argument("async_merge: dimension mismatch");
  }
  ParamVector out = global;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += alpha * (local[j] - global[j]);
  return out;
}

double staleness_weight(double alpha0, std::size_t staleness, double p) {
  if (!(alpha0 > 0.0) || !(alpha0 <= 1.0)) {
    throw std::invalid_argument("staleness_weight: alpha0 must be in (0, 1]");
  }
  if (!(p >= 0.0)) throw std::invalid_argument("staleness_weight: p must be nonnegative");
  if (staleness == 0 || p == 0.0) return alpha0;
  return alpha0 / std::pow(static_cast<double>(staleness) + 1.0, p);
}

void DpSpec::validate() const {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("dp.clip_norm must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("dp.sigma must be nonnegative and finite");
  }
}

namespace internal {

void privatize_in_place(std::span<double> values, const DpSpec& spec,
                        std::uint64_t call_index) {
  spec.validate();
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("dp_privatize: non-finite input");
  }
  if (std::isfinite(spec.clip_norm)) {
    double norm = 0.0;
    for (double v : values) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > spec.clip_norm) {
      const double scale = spec.clip_norm / norm;
      for (double& v : values) v *= scale;
    }
  }
  if (spec.sigma == 0.0) return;
  const double stddev =
      spec.sigma * (std::isfinite(spec.clip_norm) ? spec.clip_norm : 1.0);
  Rng rng(derive_seed(spec.seed, call_index));
  for (double& v : values) v += stddev * rng.normal();
}

}  // namespace internal

}  // namespace xcfed
