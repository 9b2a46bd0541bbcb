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

#ifndef MRC_QUANT_HPP
#define MRC_QUANT_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mrc/matrix.hpp"

namespace mrc {

enum class QuantMode {
  /// s = (max - min) / (2^N - 1), z = round(-min / s)
  AffineMinMax,
  /// s = max / (2^N - 1), z = -min / (2^N - 1), taken as written.
  PaperLiteral,
};

enum class ChannelAxis { Row, Column };

std::string_view to_string(QuantMode mode) noexcept;
std::string_view to_string(ChannelAxis axis) noexcept;
QuantMode parse_quant_mode(std::string_view text);
ChannelAxis parse_channel_axis(std::string_view text);

/// Round-to-nearest per-channel quantized matrix. Channel c holds column c
/// (ChannelAxis::Column) or row c (ChannelAxis::Row).
struct QuantizedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> codes;
  std::vector<double> scales;
  std::vector<double> zeros;
  unsigned bits = 8;
  ChannelAxis axis = ChannelAxis::Column;

  std::size_t channels() const noexcept { return scales.size(); }
};

/// codes = clamp(round(m / s + z), 0, 2^N - 1) per channel. Constant channels
/// get s = 1 and z = -value so they dequantize exactly. Requires 2 <= bits <= 8.
QuantizedMatrix quantize(const DenseMatrix& m, unsigned bits,
                         QuantMode mode = QuantMode::AffineMinMax,
                         ChannelAxis axis = ChannelAxis::Column);

/// s * (codes - z) per channel.
DenseMatrix dequantize(const QuantizedMatrix& q);

}  // namespace mrc

#endif  // MRC_QUANT_HPP
