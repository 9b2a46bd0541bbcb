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

#ifndef MRC_ACT_LRA_HPP
#define MRC_ACT_LRA_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mrc/factors.hpp"
#include "mrc/linalg.hpp"
#include "mrc/model.hpp"

namespace mrc {

/// Cached singular values of x_rep * W for one layer.
struct SingularSpectrum {
  std::string layer;
  std::vector<double> sigma;
  double total_energy = 0.0;

  std::size_t size() const noexcept { return sigma.size(); }
};

/// Spectrum of the activation-weighted product x_rep * W (length min(s, d)).
SingularSpectrum activation_aware_spectrum(const LayerRecord& layer, const DenseMatrix& x_rep);

/// Activation-aware rank-r factors: U = pinv(x_rep) * U* * sqrt(S) and
/// V^T = sqrt(S) * V*^T, where U* S V*^T is the rank-r truncated SVD of
/// x_rep * W. Requires 1 <= r <= min(s, d).
LowRankFactors factorize(const LayerRecord& layer, const DenseMatrix& x_rep, std::size_t r,
                         double rcond = kDefaultRcond);

/// Activation-oblivious baseline: the same construction with x_rep = I,
/// i.e. the truncated SVD of W split evenly between U and V.
LowRankFactors plain_factorize(const LayerRecord& layer, std::size_t r);

/// Normalized tail energy sum_{i >= keep} sigma_i^2 / total_energy, or 0 for
/// an all-zero spectrum. Requires keep <= spec.size().
double energy_loss(const SingularSpectrum& spec, std::size_t keep);

struct OutputError {
  /// Mean of ||X (approx - W)||^2 / ||X W||^2 over evaluated samples.
  double mean = 0.0;
  std::size_t evaluated = 0;
  /// Samples with ||X W|| = 0, excluded from the mean.
  std::size_t skipped = 0;
};

/// Proxy-average normalized output error of u v^T (+ g y^T) against W.
/// Throws ArgumentError for an empty sample set.
OutputError layer_output_error(const LayerRecord& layer, const LowRankFactors& factors,
                               const CompensationFactors* compensation,
                               std::span<const DenseMatrix> samples);

/// Same metric for an arbitrary replacement weight.
OutputError layer_output_error(const LayerRecord& layer, const DenseMatrix& approx_weight,
                               std::span<const DenseMatrix> samples);

}  // namespace mrc

#endif  // MRC_ACT_LRA_HPP
