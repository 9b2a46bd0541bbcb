/*
 * Copyright (c) 2026 The mrc Authors. All Rights Reserved
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

#include <doctest.h>

#include <cmath>

#include "mrc/cost.hpp"
#include "mrc/error.hpp"
#include "mrc/model.hpp"
#include "mrc/pipeline.hpp"
#include "mrc/quant.hpp"
#include "mrc/random.hpp"
#include "oracles.hpp"

using mrc::ChannelAxis;
using mrc::DenseMatrix;
using mrc::QuantMode;

namespace {

// Independent per-entry reconstruction with the affine min/max rule.
double channel_scale(const DenseMatrix& m, std::size_t c, unsigned bits) {
  double lo = m(0, c), hi = m(0, c);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    lo = std::min(lo, m(r, c));
    hi = std::max(hi, m(r, c));
  }
  return (hi - lo) / static_cast<double>((1u << bits) - 1);
}

}  // namespace

TEST_SUITE("quant") {

TEST_CASE("hand-evaluated channel") {
  const auto m = DenseMatrix::from_rows({{0.0}, {1.0}, {2.55}});
  const auto q = mrc::quantize(m, 8);
  REQUIRE(q.channels() == 1);
  CHECK(q.scales[0] == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(q.zeros[0] == 0.0);
  CHECK(q.codes == std::vector<std::uint8_t>{0, 100, 255});
}

TEST_CASE("constant channel dequantizes exactly") {
  const auto m = DenseMatrix::from_rows({{-0.7, 3.0}, {-0.7, 4.0}, {-0.7, 5.0}});
  for (auto axis : {ChannelAxis::Column}) {
    const auto q = mrc::quantize(m, 4, QuantMode::AffineMinMax, axis);
    CHECK(q.scales[0] == 1.0);
    CHECK(q.codes[0] == q.codes[2]);
    CHECK(q.codes[2] == q.codes[4]);
    const auto back = mrc::dequantize(q);
    for (std::size_t r = 0; r < 3; ++r) CHECK(back(r, 0) == -0.7);
  }
}

TEST_CASE("zero matrix") {
  const DenseMatrix z(4, 3);
  for (auto axis : {ChannelAxis::Row, ChannelAxis::Column}) {
    CHECK(oracle::max_abs(mrc::dequantize(mrc::quantize(z, 8, QuantMode::AffineMinMax, axis))) ==
          0.0);
  }
}

TEST_CASE("property: error per entry is at most half a step") {
  mrc::Rng rng(11);
  for (unsigned bits = 2; bits <= 8; ++bits) {
    for (int t = 0; t < 5; ++t) {
      const DenseMatrix m = oracle::random_matrix(rng, 9, 6, -3.0, 2.0);
      const auto q = mrc::quantize(m, bits);
      const auto back = mrc::dequantize(q);
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double s = channel_scale(m, c, bits);
        CHECK(q.scales[c] == doctest::Approx(s).epsilon(1e-14));
        for (std::size_t r = 0; r < m.rows(); ++r) {
          CHECK(std::abs(back(r, c) - m(r, c)) <= s / 2 + 1e-12);
          CHECK(q.codes[r * m.cols() + c] <= (1u << bits) - 1);
        }
      }
    }
  }
}

TEST_CASE("row channels") {
  mrc::Rng rng(12);
  const DenseMatrix m = oracle::random_matrix(rng, 5, 7);
  const auto q = mrc::quantize(m, 8, QuantMode::AffineMinMax, ChannelAxis::Row);
  CHECK(q.channels() == 5);
  const auto t = mrc::quantize(m.transposed(), 8);
  CHECK(oracle::max_abs(oracle::sub(mrc::dequantize(q), mrc::dequantize(t).transposed())) < 1e-15);
}

TEST_CASE("grid values are fixed points") {
  // 0.25 * (code - 4) for codes in [0, 15]
  const auto m = DenseMatrix::from_rows({{-1.0, 0.5}, {0.0, 2.75}, {2.75, -1.0}, {0.25, 1.0}});
  const auto back = mrc::dequantize(mrc::quantize(m, 4));
  CHECK(oracle::max_abs(oracle::sub(back, m)) < 1e-15);
}

TEST_CASE("property: a second pass is exact") {
  mrc::Rng rng(13);
  for (unsigned bits : {2u, 5u, 8u}) {
    const DenseMatrix m = oracle::random_matrix(rng, 8, 5);
    const auto q1 = mrc::quantize(m, bits);
    const auto d1 = mrc::dequantize(q1);
    const auto q2 = mrc::quantize(d1, bits);
    CHECK(q1.codes == q2.codes);
    CHECK(oracle::max_abs(oracle::sub(mrc::dequantize(q2), d1)) < 1e-12);
  }
}

TEST_CASE("literal mode matches affine when the minimum is zero") {
  mrc::Rng rng(14);
  DenseMatrix m = oracle::random_matrix(rng, 6, 4, 0.0, 1.0);
  for (std::size_t c = 0; c < 4; ++c) m(c, c) = 0.0;
  const auto a = mrc::quantize(m, 8, QuantMode::AffineMinMax);
  const auto p = mrc::quantize(m, 8, QuantMode::PaperLiteral);
  CHECK(a.codes == p.codes);
  for (std::size_t c = 0; c < 4; ++c) CHECK(p.zeros[c] == 0.0);
}

TEST_CASE("arguments") {
  const DenseMatrix m(2, 2);
  CHECK_THROWS_AS(mrc::quantize(m, 1), mrc::ArgumentError);
  CHECK_THROWS_AS(mrc::quantize(m, 9), mrc::ArgumentError);
  CHECK_THROWS_AS(mrc::quantize(DenseMatrix{}, 8), mrc::ArgumentError);
  CHECK(mrc::parse_quant_mode("paper_literal") == QuantMode::PaperLiteral);
  CHECK(mrc::parse_channel_axis("row") == ChannelAxis::Row);
  CHECK_THROWS_AS(mrc::parse_quant_mode("nearest"), mrc::ArgumentError);
  CHECK_THROWS_AS(mrc::parse_channel_axis("depth"), mrc::ArgumentError);
}

}  // TEST_SUITE

TEST_SUITE("cost") {

TEST_CASE("ratio examples") {
  CHECK(mrc::cost_ratio(10, 4, 4, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  // r + q = k m / (k + m) = 6 for k = 12, m = 12
  CHECK(mrc::cost_ratio(3, 12, 12, 4, 2) == doctest::Approx(1.0).epsilon(1e-15));
  const double deit = mrc::cost_ratio(197, 768, 768, 200, 30);
  CHECK(deit == doctest::Approx(230.0 * 1536.0 / 589824.0).epsilon(1e-14));
  CHECK(deit == doctest::Approx(0.599).epsilon(1e-3));
  CHECK_THROWS_AS(mrc::cost_ratio(0, 4, 4, 1, 1), mrc::ArgumentError);
  CHECK_THROWS_AS(mrc::cost_ratio(1, 4, 4, 1, -1), mrc::ArgumentError);
}

TEST_CASE("property: explicit count agrees with the closed form") {
  mrc::Rng rng(15);
  auto pick = [&](int hi) { return 1.0 + std::uniform_int_distribution<int>(0, hi - 1)(rng); };
  for (int t = 0; t < 500; ++t) {
    const double n = pick(512), k = pick(1024), m = pick(1024), r = pick(256), q = pick(64);
    const double explicit_count = n * k * r + n * r * m + n * k * q + n * q * m;
    CHECK(mrc::factored_multiplications(n, k, m, r, q) == explicit_count);
    CHECK(oracle::rel_close(mrc::cost_ratio(n, k, m, r, q), mrc::cost_ratio_closed_form(k, m, r, q),
                            1e-12));
  }
}

TEST_CASE("property: cheaper below the break-even rank") {
  for (int k = 1; k <= 12; ++k) {
    for (int m = 1; m <= 12; ++m) {
      for (int r = 1; r <= 12; ++r) {
        for (int q = 1; q <= 4; ++q) {
          const bool below = (r + q) * (k + m) < k * m;
          CHECK((mrc::cost_ratio(5, k, m, r, q) < 1.0) == below);
        }
      }
    }
  }
}

TEST_CASE("report totals and flags") {
  const std::vector<mrc::CostInput> one = {{"a", 768, 768, 200, 30}};
  const auto single = mrc::cost_report(one, 197);
  CHECK(single.total_ratio == doctest::Approx(single.layers[0].ratio).epsilon(1e-15));
  CHECK_FALSE(single.layers[0].flagged);

  const std::vector<mrc::CostInput> two = {{"a", 64, 64, 8, 2}, {"b", 4, 4, 1, 1}};
  const auto report = mrc::cost_report(two, 10);
  CHECK_FALSE(report.layers[0].flagged);
  CHECK(report.layers[1].flagged);
  CHECK(report.total_original == 10.0 * (64 * 64 + 16));
  CHECK(report.total_ratio == doctest::Approx(report.total_factored / report.total_original));
  const auto csv = mrc::cost_csv(report);
  CHECK(csv.find("b,") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("size") {

TEST_CASE("storage accounting") {
  const std::vector<mrc::StorageItem> dense = {{1000, 16}};
  CHECK(mrc::storage_bytes(dense) == 2000.0);
  const std::vector<mrc::StorageItem> half = {{500, 16}};
  CHECK(mrc::storage_bytes(half) == 0.5 * mrc::storage_bytes(dense));
  const std::vector<mrc::StorageItem> codes = {{500, 8}};
  CHECK(mrc::storage_bytes(codes) == 0.25 * mrc::storage_bytes(dense));
}

TEST_CASE("uncompressed model at 16 bits is two bytes per parameter") {
  mrc::SyntheticSpec spec;
  spec.layers = 3;
  spec.n = 8;
  spec.d = 6;
  spec.samples = 4;
  spec.tokens = 4;
  const auto model = mrc::gen_synthetic(spec);
  const auto r = mrc::size_report(model);
  CHECK(r.params == 3 * 48);
  CHECK(r.bytes == 2.0 * 3 * 48);
  CHECK(r.fp16_baseline_bytes == r.bytes);
  CHECK(r.reduction_vs_fp16 == 1.0);
}

}  // TEST_SUITE
