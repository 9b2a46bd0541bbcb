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

#include "mrc/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrc/error.hpp"

namespace mrc {

std::string_view to_string(QuantMode mode) noexcept {
  return mode == QuantMode::AffineMinMax ? "affine_minmax" : "paper_literal";
}

std::string_view to_string(ChannelAxis axis) noexcept {
  return axis == ChannelAxis::Column ? "column" : "row";
}

QuantMode parse_quant_mode(std::string_view text) {
  if (text == "affine_minmax") return QuantMode::AffineMinMax;
  if (text == "paper_literal") return QuantMode::PaperLiteral;
  throw ArgumentError("unknown quantization mode '" + std::string(text) + "'");
}

ChannelAxis parse_channel_axis(std::string_view text) {
  if (text == "column") return ChannelAxis::Column;
  if (text == "row") return ChannelAxis::Row;
  throw ArgumentError("unknown channel axis '" + std::string(text) + "'");
}

namespace {

std::size_t flat_index(const QuantizedMatrix& q, std::size_t channel, std::size_t i) {
  return q.axis == ChannelAxis::Column ? i * q.cols + channel : channel * q.cols + i;
}

}  // namespace

QuantizedMatrix quantize(const DenseMatrix& m, unsigned bits, QuantMode mode, ChannelAxis axis) {
  if (bits < 2 || bits > 8) {
    throw ArgumentError("quantize: bit width " + std::to_string(bits) + " outside [2, 8]");
  }
  if (m.empty()) throw ArgumentError("quantize: empty matrix");

  QuantizedMatrix q;
  q.rows = m.rows();
  q.cols = m.cols();
  q.bits = bits;
  q.axis = axis;
  q.codes.resize(m.size());
  const std::size_t channels = axis == ChannelAxis::Column ? m.cols() : m.rows();
  const std::size_t length = axis == ChannelAxis::Column ? m.rows() : m.cols();
  q.scales.resize(channels);
  q.zeros.resize(channels);

  const double levels = static_cast<double>((1u << bits) - 1u);
  auto values = m.data();
  for (std::size_t c = 0; c < channels; ++c) {
    double lo = values[flat_index(q, c, 0)];
    double hi = lo;
    for (std::size_t i = 1; i < length; ++i) {
      const double v = values[flat_index(q, c, i)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

    double s = 1.0;
    double z = -lo;
    if (hi > lo) {
      if (mode == QuantMode::AffineMinMax) {
        s = (hi - lo) / levels;
        z = std::round(-lo / s);
      } else {
        s = hi / levels;
        z = -lo / levels;
        if (!(s > 0.0)) s = 1.0;
      }
    }
    q.scales[c] = s;
    q.zeros[c] = z;
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t idx = flat_index(q, c, i);
      const double code = std::clamp(std::round(values[idx] / s + z), 0.0, levels);
      q.codes[idx] = static_cast<std::uint8_t>(code);
    }
  }
  return q;
}

DenseMatrix dequantize(const QuantizedMatrix& q) {
  DenseMatrix out(q.rows, q.cols);
  const std::size_t length = q.axis == ChannelAxis::Column ? q.rows : q.cols;
  for (std::size_t c = 0; c < q.channels(); ++c) {
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t idx = flat_index(q, c, i);
      out.data()[idx] = q.scales[c] * (static_cast<double>(q.codes[idx]) - q.zeros[c]);
    }
  }
  return out;
}

}  // namespace mrc
