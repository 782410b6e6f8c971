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

// Communication layer: top-k compression with error feedback, message size
// accounting, and a latency/bandwidth transfer-time model. Transport
// protocols are reduced to three scalars (per-message overhead, handshake
// latency, per-byte inflation).

#ifndef XCFED_NETSIM_H_
#define XCFED_NETSIM_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "xcfed/params.h"

namespace xcfed {

struct LinkProfile {
  double latency_ms = 0.0;
  double bandwidth_bytes_per_ms = 1.0;

  void validate() const;
};

struct ProtocolProfile {
  std::string name;
  std::uint64_t per_message_overhead_bytes = 0;
  double handshake_ms = 0.0;
  double per_byte_factor = 1.0;

  void validate() const;

  static ProtocolProfile grpc_like();
  static ProtocolProfile quic_like();
  // No overhead, no handshake, factor 1.
  static ProtocolProfile ideal();
  // Looks up a preset by name; throws std::invalid_argument otherwise.
  static ProtocolProfile preset(const std::string& name);
};

struct SparseUpdate {
  std::vector<std::uint32_t> indices;  // strictly ascending
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const { return indices.size(); }
};

struct CompressResult {
  SparseUpdate update;
  Gradient residual;
};

// Selects the ceil(k_fraction * dim) largest |grad + residual| entries
// (lowest index wins ties). The returned residual is grad + residual with
// the selected entries zeroed, so transmitted + residual reproduces the
// input sum exactly.
CompressResult compress_topk(const Gradient& grad, double k_fraction,
                             const Gradient& residual);

Gradient decompress(const SparseUpdate& update);

struct DensePayload {
  std::size_t dim = 0;
};
struct SparsePayload {
  std::size_t nnz = 0;
};
using Payload = std::variant<DensePayload, SparsePayload>;

constexpr std::uint64_t kValueBytes = 8;
constexpr std::uint64_t kIndexBytes = 4;

std::uint64_t wire_bytes(const Payload& payload, const ProtocolProfile& protocol);

// handshake + latency + bytes / bandwidth, in milliseconds.
double transfer_time(std::uint64_t bytes, const LinkProfile& link,
                     const ProtocolProfile& protocol);

enum class Direction { kDownlink, kUplink };

// Cumulative byte accounting for one run. Rounds are opened explicitly; every
// message is charged to the current round.
class CommLedger {
 public:
  void begin_round();
  void record(Direction direction, std::uint64_t bytes);

  std::uint64_t cumulative_bytes() const { return cumulative_; }
  std::uint64_t upload_bytes() const { return upload_; }
  std::uint64_t download_bytes() const { return download_; }
  std::uint64_t messages() const { return messages_; }
  const std::vector<std::uint64_t>& per_round_bytes() const { return per_round_; }
  std::uint64_t current_round_bytes() const;

 private:
  std::uint64_t cumulative_ = 0;
  std::uint64_t upload_ = 0;
  std::uint64_t download_ = 0;
  std::uint64_t messages_ = 0;
  std::vector<std::uint64_t> per_round_;
};

}  // namespace xcfed

#endif  // XCFED_NETSIM_H_
