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

#include "xcfed/engine.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "xcfed/rng.h"

namespace xcfed {

namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kPartitionStream = 0x9a27;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kDpStream = 0xd9;

// Everything a run mutates: global model, shards, residuals, clock, ledger.
class Simulation {
 public:
  explicit Simulation(const RunConfig& config) : config_(config) {
    config_.validate();
    split_ = split_dataset(config_);
    plan_ = make_partition(split_.train, config_.fleet.partition, fleet_size(),
                           derive_seed(config_.seed, kPartitionStream));
    rebuild_shards();
    global_ = init_params(config_.model, derive_seed(config_.seed, kInitStream));
    dim_ = global_.size();
    residuals_.assign(fleet_size(), Gradient(dim_));
    for (std::size_t i = 0; i < fleet_size(); ++i) {
      if (config_.dp) {
        DpSpec spec = *config_.dp;
        spec.seed = derive_seed(spec.seed ^ platform(i).id, kDpStream);
        privatizers_.emplace_back(spec);
      }
      last_losses_.push_back(forward_loss(config_.model, global_, shards_[i]));
    }
  }

  std::size_t fleet_size() const { return config_.fleet.size(); }
  const PlatformSpec& platform(std::size_t i) const {
    return config_.fleet.platforms[i];
  }
  const RunConfig& config() const { return config_; }
  const Batch& shard(std::size_t i) const { return shards_[i]; }
  ParamVector& global() { return global_; }
  CommLedger& ledger() { return ledger_; }

  // Per-platform stream: seed xor platform id, then one substream per cycle.
  std::uint64_t cycle_seed(std::size_t i, std::size_t cycle) const {
    return derive_seed(config_.seed ^ static_cast<std::uint64_t>(platform(i).id),
                       cycle);
  }

  std::uint64_t broadcast_bytes() const {
    return wire_bytes(DensePayload{dim_}, config_.fleet.protocol);
  }

  double download_ms(std::size_t i, std::uint64_t bytes) const {
    return transfer_time(bytes, platform(i).downlink, config_.fleet.protocol);
  }
  double upload_ms(std::size_t i, std::uint64_t bytes) const {
    return transfer_time(bytes, platform(i).uplink, config_.fleet.protocol);
  }
  double compute_ms(std::size_t i) const {
    return static_cast<double>(config_.local_epochs) *
           static_cast<double>(shards_[i].size()) / platform(i).compute_rate;
  }

  // Applies the upload pipeline (privatize, then compress with error
  // feedback) to a dense update and returns what the server reconstructs
  // together with the payload shape that went over the wire.
  template <typename Tag>
  std::pair<DenseVector<Tag>, Payload> transmit(std::size_t i,
                                                const DenseVector<Tag>& update) {
    DenseVector<Tag> sent = config_.dp ? privatizers_[i](update) : update;
    if (!config_.compression) return {std::move(sent), DensePayload{dim_}};
    const Gradient as_grad(sent.raw());
    auto compressed =
        compress_topk(as_grad, config_.compression->k_fraction, residuals_[i]);
    residuals_[i] = std::move(compressed.residual);
    const std::size_t nnz = compressed.update.nnz();
    return {DenseVector<Tag>(decompress(compressed.update).raw()),
            SparsePayload{nnz}};
  }

  // Parameter uploads travel as a delta from the model the platform started
  // from whenever DP or compression is on; otherwise the model is sent as is.
  std::pair<ParamVector, Payload> upload_params(std::size_t i,
                                                const ParamVector& start,
                                                const ParamVector& trained) {
    if (!config_.dp && !config_.compression) {
      return {trained, DensePayload{dim_}};
    }
    ParamVector delta(dim_);
    for (std::size_t j = 0; j < dim_; ++j) delta[j] = trained[j] - start[j];
    auto [received, payload] = transmit(i, delta);
    for (std::size_t j = 0; j < dim_; ++j) received[j] += start[j];
    return {std::move(received), payload};
  }

  std::pair<Gradient, Payload> upload_gradient(std::size_t i, const Gradient& g) {
    return transmit(i, g);
  }

  void maybe_rebalance(std::size_t events, const std::vector<double>& measured_ms) {
    const auto* dyn = std::get_if<DynamicPartition>(&config_.fleet.partition);
    if (dyn == nullptr || events % dyn->rebalance_every != 0) return;
    plan_ = rebalance_dynamic(plan_, measured_ms);
    rebuild_shards();
  }

  RoundMetrics record(std::size_t round, double clock_ms) {
    const auto eval = evaluate(config_.model, global_, split_.eval.samples);
    RoundMetrics m;
    m.round = round;
    m.eval_loss = eval.loss;
    m.eval_accuracy = eval.accuracy;
    m.round_bytes = ledger_.current_round_bytes();
    m.cumulative_bytes = ledger_.cumulative_bytes();
    m.simulated_ms = clock_ms;
    m.per_platform_losses = last_losses_;
    return m;
  }

  void set_loss(std::size_t i, double loss) { last_losses_[i] = loss; }

  RunResult finish(std::vector<RoundMetrics> rounds) {
    RunResult out;
    out.rounds = std::move(rounds);
    out.final_params = global_;
    out.upload_bytes = ledger_.upload_bytes();
    out.download_bytes = ledger_.download_bytes();
    out.messages = ledger_.messages();
    return out;
  }

 private:
  void rebuild_shards() {
    shards_.clear();
    for (const auto& rows : plan_.shards) {
      shards_.push_back(gather(split_.train.samples, rows));
    }
  }

  RunConfig config_;
  DataSplit split_;
  PartitionPlan plan_;
  std::vector<Batch> shards_;
  ParamVector global_;
  std::size_t dim_ = 0;
  std::vector<Gradient> residuals_;
  std::vector<Privatizer> privatizers_;
  std::vector<double> last_losses_;
  CommLedger ledger_;
};

void notify_global(const RunObserver& observer, std::size_t round,
                   const ParamVector& global) {
  if (observer.on_global) observer.on_global(round, global);
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  data.validate();
  if (model.features != data.features) {
    throw std::invalid_argument("model.features must equal data.features");
  }
  if (model.classes != data.classes) {
    throw std::invalid_argument("model.classes must equal data.classes");
  }
  if (fleet.platforms.empty()) {
    throw std::invalid_argument("fleet.platforms must not be empty");
  }
  for (std::size_t i = 0; i < fleet.platforms.size(); ++i) {
    const auto& p = fleet.platforms[i];
    if (p.id != static_cast<int>(i)) {
      throw std::invalid_argument("fleet.platforms ids must be 0..N-1 in order");
    }
    if (!(p.compute_rate > 0.0) || !std::isfinite(p.compute_rate)) {
      throw std::invalid_argument("fleet.platforms.compute_rate must be positive");
    }
    p.uplink.validate();
    p.downlink.validate();
  }
  validate_partition(fleet.partition, fleet.platforms.size());
  fleet.protocol.validate();
  validate_strategy(strategy);
  if (rounds < 1) throw std::invalid_argument("rounds must be positive");
  if (local_epochs < 1) throw std::invalid_argument("local_epochs must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("lr must be positive");
  }
  if (compression && (!(compression->k_fraction > 0.0) ||
                      !(compression->k_fraction <= 1.0))) {
    throw std::invalid_argument("compression.k_fraction must be in (0, 1]");
  }
  if (dp) dp->validate();
  if (!(eval_fraction > 0.0) || !(eval_fraction < 1.0)) {
    throw std::invalid_argument("eval_fraction must be in (0, 1)");
  }
  const auto n_eval = static_cast<std::size_t>(
      std::llround(eval_fraction * static_cast<double>(data.samples)));
  if (n_eval < 1 || data.samples - n_eval < fleet.platforms.size()) {
    throw std::invalid_argument(
        "eval_fraction leaves no eval samples or fewer training samples than platforms");
  }
}

DataSplit split_dataset(const RunConfig& config) {
  const Dataset all = generate_synthetic(config.data);
  const auto n_eval = static_cast<std::size_t>(
      std::llround(config.eval_fraction * static_cast<double>(all.size())));
  const std::size_t n_train = all.size() - n_eval;
  return {slice(all, 0, n_train), slice(all, n_train, all.size())};
}

LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& params,
                             const Batch& shard, std::size_t epochs,
                             std::size_t batch_size, double lr, std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("local_train: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("local_train: epochs must be >= 1");
  if (shard.size() == 0) throw std::invalid_argument("local_train: empty shard");

  LocalTrainResult out;
  loss_and_gradient(spec, params, shard, out.entry_gradient);

  const std::size_t n = shard.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  ParamVector w = params;
  Gradient g;
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      const Batch mb = gather(shard, std::span(order).subspan(start, end - start));
      loss_sum += loss_and_gradient(spec, w, mb, g) * static_cast<double>(mb.size());
      w = sgd_step(w, g, lr);
    }
    out.mean_epoch_loss = loss_sum / static_cast<double>(n);
  }
  out.params = std::move(w);
  return out;
}

EvalResult evaluate(const ModelSpec& spec, const ParamVector& params,
                    const Batch& eval_set) {
  if (eval_set.size() == 0) throw std::invalid_argument("evaluate: empty eval set");
  EvalResult out;
  out.loss = forward_loss(spec, params, eval_set);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    if (predict(spec, params, eval_set.features.row(i)) == eval_set.labels[i]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(eval_set.size());
  return out;
}

RunResult run_sync(const RunConfig& config, const RunObserver& observer) {
  if (is_async(config.strategy)) {
    throw std::invalid_argument("run_sync: async strategy requires run_async");
  }
  Simulation sim(config);
  const auto& cfg = sim.config();
  const std::size_t n = sim.fleet_size();
  notify_global(observer, 0, sim.global());

  std::vector<RoundMetrics> rounds;
  rounds.reserve(cfg.rounds);
  double clock = 0.0;
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    sim.ledger().begin_round();
    const ParamVector start = sim.global();
    std::vector<LocalResult> locals;
    std::vector<WeightedGradient> grads;
    std::vector<double> platform_ms(n);

    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t down = sim.broadcast_bytes();
      sim.ledger().record(Direction::kDownlink, down);

      const Batch& shard = sim.shard(i);
      auto trained = local_train(cfg.model, start, shard, cfg.local_epochs,
                                 cfg.batch_size, cfg.lr, sim.cycle_seed(i, round - 1));
      sim.set_loss(i, trained.mean_epoch_loss);

      Payload payload;
      if (std::holds_alternative<GradientStrategy>(cfg.strategy)) {
        auto [g, p] = sim.upload_gradient(i, trained.entry_gradient);
        grads.push_back({std::move(g), shard.size()});
        payload = p;
      } else {
        auto [w, p] = sim.upload_params(i, start, trained.params);
        locals.push_back({std::move(w), shard.size(), trained.mean_epoch_loss,
                          sim.platform(i).id});
        payload = p;
      }
      const std::uint64_t up = wire_bytes(payload, cfg.fleet.protocol);
      sim.ledger().record(Direction::kUplink, up);
      platform_ms[i] = sim.download_ms(i, down) + sim.compute_ms(i) + sim.upload_ms(i, up);
    }

    if (const auto* g = std::get_if<GradientStrategy>(&cfg.strategy)) {
      sim.global() = gradient_aggregate(start, grads, g->lr);
    } else if (std::holds_alternative<DynamicWeightedStrategy>(cfg.strategy)) {
      sim.global() = dynamic_aggregate(locals);
    } else {
      sim.global() = fedavg(locals);
    }
    notify_global(observer, round, sim.global());

    clock += *std::max_element(platform_ms.begin(), platform_ms.end());
    rounds.push_back(sim.record(round, clock));
    sim.maybe_rebalance(round, platform_ms);
  }
  return sim.finish(std::move(rounds));
}

RunResult run_async(const RunConfig& config, const RunObserver& observer) {
  const auto* strategy = std::get_if<AsyncStrategy>(&config.strategy);
  if (strategy == nullptr) {
    throw std::invalid_argument("run_async: strategy must be async");
  }
  Simulation sim(config);
  const auto& cfg = sim.config();
  const std::size_t n = sim.fleet_size();
  notify_global(observer, 0, sim.global());

  // One in-flight cycle per platform: download, train, upload.
  struct Cycle {
    double arrival = 0.0;
    std::size_t platform = 0;
    std::size_t base_version = 0;
    ParamVector received;
    std::uint64_t bytes = 0;  // upload; the download is charged separately
    double loss = 0.0;
    double duration = 0.0;
  };
  std::vector<Cycle> inflight(n);
  std::vector<std::size_t> cycles_done(n, 0);
  std::vector<double> last_cycle_ms(n, 0.0);
  std::size_t version = 0;

  auto launch = [&](std::size_t i, double start_ms) {
    Cycle c;
    c.platform = i;
    c.base_version = version;
    const ParamVector start = sim.global();
    const std::uint64_t down = sim.broadcast_bytes();
    auto trained = local_train(cfg.model, start, sim.shard(i), cfg.local_epochs,
                               cfg.batch_size, cfg.lr, sim.cycle_seed(i, cycles_done[i]));
    auto [w, payload] = sim.upload_params(i, start, trained.params);
    const std::uint64_t up = wire_bytes(payload, cfg.fleet.protocol);
    c.received = std::move(w);
    c.bytes = up;
    c.loss = trained.mean_epoch_loss;
    c.duration = sim.download_ms(i, down) + sim.compute_ms(i) + sim.upload_ms(i, up);
    c.arrival = start_ms + c.duration;
    inflight[i] = std::move(c);
    return down;
  };

  // Earliest arrival first; ties go to the lower platform id.
  using Key = std::pair<double, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> events;
  std::vector<std::uint64_t> pending_down(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending_down[i] = launch(i, 0.0);
    events.push({inflight[i].arrival, i});
  }

  std::vector<RoundMetrics> rounds;
  rounds.reserve(cfg.rounds);
  for (std::size_t merge = 1; merge <= cfg.rounds; ++merge) {
    const auto [clock, i] = events.top();
    events.pop();
    Cycle& c = inflight[i];

    sim.ledger().begin_round();
    sim.ledger().record(Direction::kDownlink, pending_down[i]);
    sim.ledger().record(Direction::kUplink, c.bytes);

    const std::size_t staleness = version - c.base_version;
    const double alpha =
        staleness_weight(strategy->alpha0, staleness, strategy->staleness_exponent);
    sim.global() = async_merge(sim.global(), c.received, alpha);
    ++version;
    ++cycles_done[i];
    sim.set_loss(i, c.loss);
    last_cycle_ms[i] = c.duration;
    if (observer.on_merge) observer.on_merge(merge, sim.platform(i).id, staleness);
    notify_global(observer, merge, sim.global());

    rounds.push_back(sim.record(merge, clock));
    if (std::all_of(last_cycle_ms.begin(), last_cycle_ms.end(),
                    [](double ms) { return ms > 0.0; })) {
      sim.maybe_rebalance(merge, last_cycle_ms);
    }
    if (merge < cfg.rounds) {
      pending_down[i] = launch(i, clock);
      events.push({inflight[i].arrival, i});
    }
  }
  return sim.finish(std::move(rounds));
}

RunResult run(const RunConfig& config, const RunObserver& observer) {
  return is_async(config.strategy) ? run_async(config, observer)
                                   : run_sync(config, observer);
}

}  // namespace xcfed
