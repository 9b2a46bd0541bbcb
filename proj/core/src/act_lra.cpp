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

#include "mrc/act_lra.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/error.hpp"

namespace mrc {

namespace {

void require_input_width(const LayerRecord& layer, const DenseMatrix& x_rep) {
  if (x_rep.cols() != layer.n()) {
    throw DimensionMismatchError("layer '" + layer.name + "': representative input has " +
                                 std::to_string(x_rep.cols()) + " columns, weight has " +
                                 std::to_string(layer.n()) + " rows");
  }
}

LowRankFactors split_truncated(const SvdResult& full, std::size_t r, const std::string& layer) {
  if (r < 1 || r > full.rank()) {
    throw ArgumentError("layer '" + layer + "': rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(full.rank()) + "]");
  }
  SvdResult t = truncate(full, r);
  // Scale left vectors and right vectors by sqrt(sigma) each.
  for (std::size_t i = 0; i < t.u.rows(); ++i) {
    auto row = t.u.row(i);
    for (std::size_t j = 0; j < r; ++j) row[j] *= std::sqrt(t.sigma[j]);
  }
  for (std::size_t j = 0; j < r; ++j) {
    const double s = std::sqrt(t.sigma[j]);
    for (double& v : t.vt.row(j)) v *= s;
  }
  return LowRankFactors{std::move(t.u), t.vt.transposed()};
}

}  // namespace

SingularSpectrum activation_aware_spectrum(const LayerRecord& layer, const DenseMatrix& x_rep) {
  require_input_width(layer, x_rep);
  SingularSpectrum spec;
  spec.layer = layer.name;
  spec.sigma = singular_values(matmul(x_rep, layer.weight));
  // Sum smallest first.
  for (auto it = spec.sigma.rbegin(); it != spec.sigma.rend(); ++it) spec.total_energy += *it * *it;
  return spec;
}

LowRankFactors factorize(const LayerRecord& layer, const DenseMatrix& x_rep, std::size_t r,
                         double rcond) {
  require_input_width(layer, x_rep);
  const SvdResult full = svd(matmul(x_rep, layer.weight));
  LowRankFactors f = split_truncated(full, r, layer.name);
  f.u = matmul(pinv(x_rep, rcond), f.u);
  return f;
}

LowRankFactors plain_factorize(const LayerRecord& layer, std::size_t r) {
  return split_truncated(svd(layer.weight), r, layer.name);
}

double energy_loss(const SingularSpectrum& spec, std::size_t keep) {
  if (keep > spec.size()) {
    throw ArgumentError("energy_loss: keep " + std::to_string(keep) + " exceeds spectrum length " +
                        std::to_string(spec.size()));
  }
  if (spec.total_energy <= 0.0) return 0.0;
  double tail = 0.0;
  for (std::size_t i = spec.size(); i > keep; --i) tail += spec.sigma[i - 1] * spec.sigma[i - 1];
  return std::clamp(tail / spec.total_energy, 0.0, 1.0);
}

OutputError layer_output_error(const LayerRecord& layer, const LowRankFactors& factors,
                               const CompensationFactors* compensation,
                               std::span<const DenseMatrix> samples) {
  DenseMatrix approx = factors.product();
  if (compensation != nullptr) approx += compensation->product();
  return layer_output_error(layer, approx, samples);
}

OutputError layer_output_error(const LayerRecord& layer, const DenseMatrix& approx_weight,
                               std::span<const DenseMatrix> samples) {
  if (samples.empty()) {
    throw ArgumentError("layer '" + layer.name + "': empty proxy for output error");
  }
  const DenseMatrix delta = approx_weight - layer.weight;
  OutputError out;
  double sum = 0.0;
  for (const DenseMatrix& x : samples) {
    const double reference = squared_norm(matmul(x, layer.weight));
    if (reference == 0.0) {
      ++out.skipped;
      continue;
    }
    sum += squared_norm(matmul(x, delta)) / reference;
    ++out.evaluated;
  }
  out.mean = out.evaluated == 0 ? 0.0 : sum / static_cast<double>(out.evaluated);
  return out;
}

}  // namespace mrc
