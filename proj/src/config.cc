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

#include "xcfed/config.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "xcfed/rng.h"

namespace xcfed {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDataSeedTag = 0xda7a;
constexpr std::uint64_t kDpSeedTag = 0xd9;

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Strict reader over one JSON object: every key must be consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
    }
  }

  bool has(const std::string& key) const {
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    const json* v = child(key);
    if (v == nullptr) return require(key, fallback);
    if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
    return v->get<double>();
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = {}) {
    const json* v = child(key);
    if (v == nullptr) return require(key, fallback);
    // Parsed literals are unsigned; values built in code may be signed.
    const bool ok = v->is_number_unsigned() ||
                    (v->is_number_integer() && v->get<std::int64_t>() >= 0);
    if (!ok) {
      throw ConfigError(path(key) + ": expected a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = {}) {
    const json* v = child(key);
    if (v == nullptr) return require(key, fallback);
    if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return {};
    if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : *v) {
      if (!x.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path(key) + ": unknown field");
    }
  }

 private:
  template <typename T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError(path(key) + ": required field missing");
    return *fallback;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

LinkProfile parse_link(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LinkProfile link;
  link.latency_ms = r.number("latency_ms");
  link.bandwidth_bytes_per_ms = r.number("bandwidth_bytes_per_ms");
  r.finish();
  try {
    link.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return link;
}

ProtocolProfile parse_protocol(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return ProtocolProfile::preset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  ObjectReader r(j, path);
  ProtocolProfile p;
  p.name = r.text("name", std::string("custom"));
  p.per_message_overhead_bytes = r.count("per_message_overhead_bytes");
  p.handshake_ms = r.number("handshake_ms");
  p.per_byte_factor = r.number("per_byte_factor");
  r.finish();
  return p;
}

PartitionStrategy parse_partition(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.text("kind");
  PartitionStrategy out;
  if (kind == "fixed") {
    FixedPartition f;
    f.proportions = r.numbers("proportions");
    out = f;
  } else if (kind == "dirichlet") {
    DirichletPartition d;
    d.beta = r.number("beta");
    d.proportions = r.numbers("proportions");
    out = d;
  } else if (kind == "dynamic") {
    out = DynamicPartition{r.count("rebalance_every")};
  } else {
    throw ConfigError(r.path("kind") + ": expected fixed, dirichlet or dynamic");
  }
  r.finish();
  return out;
}

AggregationStrategy parse_strategy(const json& j, double run_lr) {
  ObjectReader r(j, "strategy");
  const std::string kind = r.text("kind");
  AggregationStrategy out;
  if (kind == "fedavg") {
    out = FedAvgStrategy{};
  } else if (kind == "dynamic-weighted") {
    out = DynamicWeightedStrategy{};
  } else if (kind == "gradient") {
    out = GradientStrategy{r.number("lr", run_lr)};
  } else if (kind == "async") {
    out = AsyncStrategy{r.number("alpha0", 0.5), r.number("staleness_exponent", 0.0)};
  } else {
    throw ConfigError("strategy.kind: expected fedavg, dynamic-weighted, gradient or async");
  }
  r.finish();
  return out;
}

FleetConfig parse_fleet(const json& j) {
  ObjectReader r(j, "fleet");
  FleetConfig fleet;
  if (const json* proto = r.child("protocol")) {
    fleet.protocol = parse_protocol(*proto, "fleet.protocol");
  }
  const json* platforms = r.child("platforms");
  if (platforms == nullptr || !platforms->is_array() || platforms->empty()) {
    throw ConfigError("fleet.platforms: expected a nonempty array");
  }
  for (std::size_t i = 0; i < platforms->size(); ++i) {
    const std::string path = "fleet.platforms[" + std::to_string(i) + "]";
    ObjectReader pr(platforms->at(i), path);
    PlatformSpec p;
    p.id = static_cast<int>(i);
    if (pr.has("id") && pr.count("id") != i) {
      throw ConfigError(pr.path("id") + ": ids must be 0..N-1 in order");
    }
    pr.child("id");
    p.compute_rate = pr.number("compute_rate");
    // `link` sets both directions; uplink/downlink override it.
    const json* both = pr.child("link");
    const json* up = pr.child("uplink");
    const json* down = pr.child("downlink");
    if (up == nullptr && both == nullptr) throw ConfigError(path + ".uplink: required field missing");
    if (down == nullptr && both == nullptr) {
      throw ConfigError(path + ".downlink: required field missing");
    }
    p.uplink = up ? parse_link(*up, path + ".uplink") : parse_link(*both, path + ".link");
    p.downlink =
        down ? parse_link(*down, path + ".downlink") : parse_link(*both, path + ".link");
    pr.finish();
    fleet.platforms.push_back(p);
  }
  const json* partition = r.child("partition");
  if (partition == nullptr) throw ConfigError("fleet.partition: required field missing");
  fleet.partition = parse_partition(*partition, "fleet.partition");
  r.finish();
  return fleet;
}

json link_json(const LinkProfile& l) {
  return {{"latency_ms", l.latency_ms}, {"bandwidth_bytes_per_ms", l.bandwidth_bytes_per_ms}};
}

}  // namespace

RunConfig parse_run_config(const json& entry) {
  ObjectReader r(entry, "");
  RunConfig c;
  c.seed = r.count("seed", 0);
  c.rounds = r.count("rounds");
  c.local_epochs = r.count("local_epochs", 1);
  c.batch_size = r.count("batch_size", 32);
  c.lr = r.number("lr");
  c.eval_fraction = r.number("eval_fraction", 0.2);

  const json* data = r.child("data");
  if (data == nullptr) throw ConfigError("data: required field missing");
  {
    ObjectReader dr(*data, "data");
    c.data.samples = dr.count("samples");
    c.data.features = dr.count("features");
    c.data.classes = dr.count("classes");
    c.data.separation = dr.number("separation", 6.0);
    c.data.seed = dr.count("seed", derive_seed(c.seed, kDataSeedTag));
    dr.finish();
  }

  const json* model = r.child("model");
  {
    const json empty = json::object();
    ObjectReader mr(model ? *model : empty, "model");
    c.model.kind = ModelKind::kLogisticRegression;
    try {
      c.model.kind = parse_model_kind(mr.text("kind", std::string("logistic-regression")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model.kind: ") + e.what());
    }
    c.model.features = mr.count("features", c.data.features);
    c.model.classes = mr.count("classes", c.data.classes);
    c.model.hidden = c.model.kind == ModelKind::kMlp ? mr.count("hidden", 16) : 0;
    if (c.model.kind != ModelKind::kMlp && mr.has("hidden")) {
      throw ConfigError("model.hidden: only valid for mlp");
    }
    mr.child("hidden");
    mr.finish();
  }

  const json* fleet = r.child("fleet");
  if (fleet == nullptr) throw ConfigError("fleet: required field missing");
  c.fleet = parse_fleet(*fleet);

  const json* strategy = r.child("strategy");
  if (strategy == nullptr) throw ConfigError("strategy: required field missing");
  c.strategy = parse_strategy(*strategy, c.lr);

  if (const json* comp = r.child("compression")) {
    ObjectReader cr(*comp, "compression");
    c.compression = CompressionSpec{cr.number("k_fraction")};
    cr.finish();
  }
  if (const json* dp = r.child("dp")) {
    ObjectReader dr(*dp, "dp");
    DpSpec spec;
    if (const json* clip = dr.child("clip_norm")) {
      if (clip->is_string() && clip->get<std::string>() == "inf") {
        spec.clip_norm = std::numeric_limits<double>::infinity();
      } else if (clip->is_number()) {
        spec.clip_norm = clip->get<double>();
      } else {
        throw ConfigError("dp.clip_norm: expected a number or \"inf\"");
      }
    }
    spec.sigma = dr.number("sigma", 0.0);
    spec.seed = dr.count("seed", derive_seed(c.seed, kDpSeedTag));
    dr.finish();
    c.dp = spec;
  }
  r.finish();

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["rounds"] = c.rounds;
  j["local_epochs"] = c.local_epochs;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.lr;
  j["eval_fraction"] = c.eval_fraction;
  j["data"] = {{"samples", c.data.samples},
               {"features", c.data.features},
               {"classes", c.data.classes},
               {"separation", c.data.separation},
               {"seed", c.data.seed}};
  j["model"] = {{"kind", std::string(to_string(c.model.kind))},
                {"features", c.model.features},
                {"classes", c.model.classes}};
  if (c.model.kind == ModelKind::kMlp) j["model"]["hidden"] = c.model.hidden;

  json fleet;
  const auto& proto = c.fleet.protocol;
  fleet["protocol"] = {{"name", proto.name},
                       {"per_message_overhead_bytes", proto.per_message_overhead_bytes},
                       {"handshake_ms", proto.handshake_ms},
                       {"per_byte_factor", proto.per_byte_factor}};
  fleet["platforms"] = json::array();
  for (const auto& p : c.fleet.platforms) {
    fleet["platforms"].push_back({{"id", p.id},
                                  {"compute_rate", p.compute_rate},
                                  {"uplink", link_json(p.uplink)},
                                  {"downlink", link_json(p.downlink)}});
  }
  if (const auto* f = std::get_if<FixedPartition>(&c.fleet.partition)) {
    fleet["partition"] = {{"kind", "fixed"}, {"proportions", f->proportions}};
  } else if (const auto* d = std::get_if<DirichletPartition>(&c.fleet.partition)) {
    fleet["partition"] = {{"kind", "dirichlet"}, {"beta", d->beta}};
    if (!d->proportions.empty()) fleet["partition"]["proportions"] = d->proportions;
  } else {
    fleet["partition"] = {
        {"kind", "dynamic"},
        {"rebalance_every", std::get<DynamicPartition>(c.fleet.partition).rebalance_every}};
  }
  j["fleet"] = fleet;

  json strategy = {{"kind", std::string(strategy_name(c.strategy))}};
  if (const auto* g = std::get_if<GradientStrategy>(&c.strategy)) {
    strategy["lr"] = g->lr;
  } else if (const auto* a = std::get_if<AsyncStrategy>(&c.strategy)) {
    strategy["alpha0"] = a->alpha0;
    strategy["staleness_exponent"] = a->staleness_exponent;
  }
  j["strategy"] = strategy;
  j["compression"] = c.compression ? json{{"k_fraction", c.compression->k_fraction}} : json();
  if (c.dp) {
    j["dp"] = {{"sigma", c.dp->sigma}, {"seed", c.dp->seed}};
    if (std::isfinite(c.dp->clip_norm)) {
      j["dp"]["clip_norm"] = c.dp->clip_norm;
    } else {
      j["dp"]["clip_norm"] = "inf";
    }
  } else {
    j["dp"] = nullptr;
  }
  return j;
}

ExperimentFile parse_experiment(const json& doc,
                                std::optional<std::uint64_t> seed_override) {
  ObjectReader r(doc, "");
  ExperimentFile out;
  const json* version = r.child("version");
  if (version == nullptr) throw ConfigError("version: required field missing");
  if (!version->is_string()) throw ConfigError("version: expected a string");
  out.version = version->get<std::string>();
  if (out.version != kSchemaVersion) {
    throw ConfigError("version: unsupported schema version '" + out.version +
                      "' (expected '" + kSchemaVersion + "')");
  }
  json defaults = json::object();
  if (const json* d = r.child("defaults")) {
    if (!d->is_object()) throw ConfigError("defaults: expected an object");
    defaults = *d;
  }
  const json* entries = r.child("entries");
  if (entries == nullptr || !entries->is_array() || entries->empty()) {
    throw ConfigError("entries: expected a nonempty array");
  }
  r.finish();

  std::set<std::string> names;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string path = "entries[" + std::to_string(i) + "]";
    const json& e = entries->at(i);
    if (!e.is_object()) throw ConfigError(path + ": expected an object");
    if (!e.contains("name") || !e.at("name").is_string()) {
      throw ConfigError(path + ".name: required string field");
    }
    const std::string name = e.at("name").get<std::string>();
    if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
      throw ConfigError(path + ".name: must be nonempty with no spaces or slashes");
    }
    if (!names.insert(name).second) {
      throw ConfigError(path + ".name: duplicate entry name '" + name + "'");
    }
    json merged = defaults;
    json patch = e;
    patch.erase("name");
    merged.merge_patch(patch);
    if (seed_override) merged["seed"] = *seed_override;
    try {
      out.entries.push_back({name, parse_run_config(merged)});
    } catch (const ConfigError& err) {
      throw ConfigError(path + " (" + name + "): " + err.what());
    }
  }
  return out;
}

ExperimentFile load_experiment(const std::filesystem::path& path,
                               std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_experiment(doc, seed_override);
}

}  // namespace xcfed
