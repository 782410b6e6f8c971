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

#include "xcfed/netsim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace xcfed {

namespace {

// ceil(raw * factor), ignoring representation error in the factor so that
// e.g. 8000 * 1.02 is 8160 and not 8161.
std::uint64_t inflate(std::uint64_t raw, double factor) {
  const double exact = static_cast<double>(raw) * factor;
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::ceil(exact));
}

}  // namespace

void LinkProfile::validate() const {
  if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms)) {
    throw std::invalid_argument("link.latency_ms must be nonnegative and finite");
  }
  if (!(bandwidth_bytes_per_ms > 0.0) || !std::isfinite(bandwidth_bytes_per_ms)) {
    throw std::invalid_argument("link.bandwidth_bytes_per_ms must be positive and finite");
  }
}

void ProtocolProfile::validate() const {
  if (!(handshake_ms >= 0.0) || !std::isfinite(handshake_ms)) {
    throw std::invalid_argument("protocol.handshake_ms must be nonnegative and finite");
  }
  if (!(per_byte_factor >= 1.0) || !std::isfinite(per_byte_factor)) {
    throw std::invalid_argument("protocol.per_byte_factor must be finite and >= 1");
  }
}

ProtocolProfile ProtocolProfile::grpc_like() { return {"grpc-like", 128, 2.0, 1.02}; }
ProtocolProfile ProtocolProfile::quic_like() { return {"quic-like", 64, 0.5, 1.01}; }
ProtocolProfile ProtocolProfile::ideal() { return {"ideal", 0, 0.0, 1.0}; }

ProtocolProfile ProtocolProfile::preset(const std::string& name) {
  if (name == "grpc-like") return grpc_like();
  if (name == "quic-like") return quic_like();
  if (name == "ideal") return ideal();
  throw std::invalid_argument("unknown protocol preset '" + name +
                              "' (expected grpc-like, quic-like or ideal)");
}

CompressResult compress_topk(const Gradient& grad, double k_fraction,
                             const Gradient& residual) {
  if (!(k_fraction > 0.0) || !(k_fraction <= 1.0)) {
    throw std::invalid_argument("compress_topk: k_fraction must be in (0, 1]");
  }
  if (grad.size() != residual.size()) {
    throw std::invalid_argument("compress_topk: gradient/residual dimension mismatch");
  }
  const std::size_t dim = grad.size();
  if (dim > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("compress_topk: dimension exceeds 32-bit indices");
  }

  Gradient acc(dim);
  for (std::size_t j = 0; j < dim; ++j) acc[j] = grad[j] + residual[j];

  const auto k = std::min<std::size_t>(
      dim, static_cast<std::size_t>(std::ceil(k_fraction * static_cast<double>(dim))));
  std::vector<std::uint32_t> order(dim);
  std::iota(order.begin(), order.end(), 0u);
  auto by_magnitude = [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(acc[a]);
    const double mb = std::abs(acc[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), by_magnitude);
  order.resize(k);
  std::sort(order.begin(), order.end());

  CompressResult out;
  out.update.dim = dim;
  out.update.indices = order;
  out.update.values.reserve(k);
  for (std::uint32_t j : order) {
    out.update.values.push_back(acc[j]);
    acc[j] = 0.0;
  }
  out.residual = std::move(acc);
  return out;
}

Gradient decompress(const SparseUpdate& update) {
  if (update.indices.size() != update.values.size()) {
    throw std::invalid_argument("decompress: indices/values length mismatch");
  }
  Gradient out(update.dim);
  for (std::size_t n = 0; n < update.indices.size(); ++n) {
    if (update.indices[n] >= update.dim ||
        (n > 0 && update.indices[n] <= update.indices[n - 1])) {
      throw std::invalid_argument("decompress: indices must be ascending and < dim");
    }
    out[update.indices[n]] = update.values[n];
  }
  return out;
}

std::uint64_t wire_bytes(const Payload& payload, const ProtocolProfile& protocol) {
  std::uint64_t raw = 0;
  if (const auto* d = std::get_if<DensePayload>(&payload)) {
    raw = kValueBytes * d->dim;
  } else {
    raw = (kValueBytes + kIndexBytes) * std::get<SparsePayload>(payload).nnz;
  }
  return inflate(raw, protocol.per_byte_factor) + protocol.per_message_overhead_bytes;
}

double transfer_time(std::uint64_t bytes, const LinkProfile& link,
                     const ProtocolProfile& protocol) {
  return protocol.handshake_ms + link.latency_ms +
         static_cast<double>(bytes) / link.bandwidth_bytes_per_ms;
}

void CommLedger::begin_round() { per_round_.push_back(0); }

void CommLedger::record(Direction direction, std::uint64_t bytes) {
  if (per_round_.empty()) begin_round();
  per_round_.back() += bytes;
  cumulative_ += bytes;
  ++messages_;
  (direction == Direction::kUplink ? upload_ : download_) += bytes;
}

std::uint64_t CommLedger::current_round_bytes() const {
  return per_round_.empty() ? 0 : per_round_.back();
}

}  // namespace xcfed
