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

#include <cmath>

#include "gtest/gtest.h"
#include "xcfed/rng.h"

namespace xcfed {
namespace {

Gradient random_gradient(Rng& rng, std::size_t dim, bool with_ties) {
  Gradient g(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    g[j] = with_ties ? static_cast<double>(static_cast<int>(rng.below(5)) - 2)
                     : rng.normal();
  }
  return g;
}

TEST(CompressTopkTest, PicksLargestMagnitude) {
  const auto r = compress_topk(Gradient{3, -5, 1}, 1.0 / 3.0, Gradient(3));
  EXPECT_EQ(r.update.indices, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(r.update.values, (std::vector<double>{-5}));
  EXPECT_EQ(r.update.dim, 3u);
  EXPECT_EQ(r.residual, (Gradient{3, 0, 1}));
}

TEST(CompressTopkTest, FullFractionSendsEverything) {
  const Gradient g{0.5, -1.5, 0.0, 2.0};
  const auto r = compress_topk(g, 1.0, Gradient(4));
  EXPECT_EQ(r.update.nnz(), 4u);
  EXPECT_EQ(r.residual, Gradient(4));
  EXPECT_EQ(decompress(r.update), g);
}

TEST(CompressTopkTest, TiesGoToLowestIndex) {
  const auto r = compress_topk(Gradient{1, -2, 2, 2, -2}, 0.4, Gradient(5));
  EXPECT_EQ(r.update.indices, (std::vector<std::uint32_t>{1, 2}));
}

TEST(CompressTopkTest, ResidualFeedsNextCall) {
  const auto first = compress_topk(Gradient{3, -5, 1}, 1.0 / 3.0, Gradient(3));
  const auto second = compress_topk(Gradient{1, 1, 1}, 1.0 / 3.0, first.residual);
  EXPECT_EQ(second.update.indices, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(second.update.values, (std::vector<double>{4}));
  EXPECT_EQ(second.residual, (Gradient{0, 1, 2}));
}

TEST(CompressTopkTest, Errors) {
  EXPECT_THROW(compress_topk(Gradient{1}, 0.0, Gradient(1)), std::invalid_argument);
  EXPECT_THROW(compress_topk(Gradient{1}, 1.5, Gradient(1)), std::invalid_argument);
  EXPECT_THROW(compress_topk(Gradient{1, 2}, 0.5, Gradient(1)), std::invalid_argument);
}

TEST(CompressTopkTest, ConservationIsExact) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 1 + rng.below(64);
    const Gradient g = random_gradient(rng, dim, trial % 3 == 0);
    const Gradient res = random_gradient(rng, dim, trial % 5 == 0);
    const double k = std::max(1e-3, rng.uniform());
    const auto r = compress_topk(g, k, res);
    const Gradient sent = decompress(r.update);
    ASSERT_EQ(r.update.nnz(), static_cast<std::size_t>(std::ceil(k * static_cast<double>(dim))));
    for (std::size_t j = 0; j < dim; ++j) {
      ASSERT_EQ(sent[j] + r.residual[j], g[j] + res[j]) << "trial " << trial;
    }
    for (std::size_t n = 1; n < r.update.nnz(); ++n) {
      ASSERT_LT(r.update.indices[n - 1], r.update.indices[n]);
    }
  }
}

TEST(DecompressTest, Placement) {
  EXPECT_EQ(decompress({{0, 2}, {1.5, -2}, 4}), (Gradient{1.5, 0, -2, 0}));
  EXPECT_EQ(decompress({{}, {}, 3}), Gradient(3));
  EXPECT_THROW(decompress({{2, 1}, {1, 1}, 4}), std::invalid_argument);
  EXPECT_THROW(decompress({{4}, {1}, 4}), std::invalid_argument);
}

TEST(WireBytesTest, Examples) {
  const ProtocolProfile bare{"bare", 0, 0.0, 1.0};
  EXPECT_EQ(wire_bytes(DensePayload{1000}, bare), 8000u);
  EXPECT_EQ(wire_bytes(SparsePayload{100}, ProtocolProfile{"p", 64, 0.0, 1.0}), 1264u);
  // ceil(8000 * 1.02) + 128
  EXPECT_EQ(wire_bytes(DensePayload{1000}, ProtocolProfile::grpc_like()), 8288u);
  // ceil(12 * 7 * 1.01) + 64 = ceil(84.84) + 64
  EXPECT_EQ(wire_bytes(SparsePayload{7}, ProtocolProfile::quic_like()), 149u);
}

TEST(WireBytesTest, SparseSmallerBelowTwoThirds) {
  for (const auto& proto : {ProtocolProfile::ideal(), ProtocolProfile::grpc_like(),
                            ProtocolProfile::quic_like()}) {
    for (std::size_t dim : {3u, 30u, 210u, 999u}) {
      for (std::size_t nnz = 0; 3 * nnz <= 2 * dim; ++nnz) {
        EXPECT_LE(wire_bytes(SparsePayload{nnz}, proto), wire_bytes(DensePayload{dim}, proto));
        if (3 * nnz < 2 * dim) {
          EXPECT_LT(wire_bytes(SparsePayload{nnz}, proto),
                    wire_bytes(DensePayload{dim}, proto));
        }
      }
    }
  }
}

TEST(TransferTimeTest, Formula) {
  const LinkProfile link{50.0, 1000.0};
  const ProtocolProfile none{"none", 0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(transfer_time(8000, link, none), 58.0);
  EXPECT_DOUBLE_EQ(transfer_time(0, link, ProtocolProfile::grpc_like()), 52.0);
  const double t1 = transfer_time(3000, link, none);
  const double t2 = transfer_time(6000, link, none);
  EXPECT_DOUBLE_EQ(t2 - t1, 3000.0 / 1000.0);
}

TEST(ProfileTest, PresetsAndValidation) {
  EXPECT_EQ(ProtocolProfile::preset("quic-like").per_message_overhead_bytes, 64u);
  EXPECT_THROW(ProtocolProfile::preset("tcp"), std::invalid_argument);
  EXPECT_THROW((ProtocolProfile{"x", 0, 0.0, 0.9}.validate()), std::invalid_argument);
  EXPECT_THROW((LinkProfile{1.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((LinkProfile{-1.0, 1.0}.validate()), std::invalid_argument);
}

TEST(CommLedgerTest, Accounting) {
  CommLedger ledger;
  ledger.begin_round();
  ledger.record(Direction::kDownlink, 100);
  ledger.record(Direction::kUplink, 40);
  ledger.begin_round();
  ledger.record(Direction::kUplink, 7);
  EXPECT_EQ(ledger.cumulative_bytes(), 147u);
  EXPECT_EQ(ledger.upload_bytes(), 47u);
  EXPECT_EQ(ledger.download_bytes(), 100u);
  EXPECT_EQ(ledger.messages(), 3u);
  EXPECT_EQ(ledger.per_round_bytes(), (std::vector<std::uint64_t>{140, 7}));
  EXPECT_EQ(ledger.current_round_bytes(), 7u);
}

}  // namespace
}  // namespace xcfed
