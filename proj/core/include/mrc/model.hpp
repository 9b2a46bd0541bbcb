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

#ifndef MRC_MODEL_HPP
#define MRC_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/matrix.hpp"

namespace mrc {

enum class LayerKind { Qkv, AttnProj, Mlp1, Mlp2, Generic };

std::string_view to_string(LayerKind kind) noexcept;
LayerKind parse_layer_kind(std::string_view text);

/// One compressible linear layer, out = x * weight + bias, weight n x d.
struct LayerRecord {
  std::string name;
  LayerKind kind = LayerKind::Generic;
  DenseMatrix weight;
  std::optional<std::vector<double>> bias;

  std::size_t n() const noexcept { return weight.rows(); }
  std::size_t d() const noexcept { return weight.cols(); }
};

/// Calibration activations captured at the input of one layer: N samples,
/// each s x n.
struct ActivationStack {
  std::string layer;
  std::vector<DenseMatrix> samples;
};

/// Per-layer activation stacks; sample count is identical across layers.
struct ProxyDataset {
  std::vector<ActivationStack> stacks;

  std::size_t sample_count() const noexcept {
    return stacks.empty() ? 0 : stacks.front().samples.size();
  }
  /// Throws ArgumentError for an unknown layer name.
  const ActivationStack& stack(std::string_view layer) const;
};

struct ModelBundle {
  std::vector<LayerRecord> layers;
  ProxyDataset proxy;
  std::map<std::string, std::string> metadata;

  /// Index of the named layer; throws ArgumentError if absent.
  std::size_t layer_index(std::string_view name) const;
};

/// Checks every bundle invariant; each violation raises the matching error
/// category with the offending layer named.
void validate(const ModelBundle& bundle);

/// Mean of the proxy samples for `layer`: (1/N) * sum_i X^i.
DenseMatrix representative_input(const ProxyDataset& proxy, std::string_view layer);

/// Mean over the selected sample indices only.
DenseMatrix representative_input(const ActivationStack& stack,
                                 std::span<const std::size_t> indices);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t layers = 4;
  std::size_t n = 32;
  std::size_t d = 32;
  std::size_t tokens = 48;
  std::size_t samples = 64;
  double spectrum_decay = 0.9;
};

/// Builds a chain of linear layers joined by max(0, x) and the activations
/// seen at each layer input.
///
/// Even layers are n x d and odd layers d x n, so consecutive layers
/// compose. Weight singular values decay as scale * spectrum_decay^i.
/// Layer-0 inputs share a fixed s x n component with anisotropic column
/// covariance; each sample adds a weaker Gaussian deviation whose covariance
/// decays faster, along different principal directions.
ModelBundle gen_synthetic(const SyntheticSpec& spec);

/// Singular value scale of generated weights.
inline constexpr double kSyntheticWeightScale = 3e-3;

/// Metadata key/value marking a bundle whose layers form a ReLU chain.
inline constexpr std::string_view kTopologyKey = "topology";
inline constexpr std::string_view kTopologyChain = "relu-chain";

/// x * weight + bias for every row of x.
DenseMatrix apply_layer(const LayerRecord& layer, const DenseMatrix& x);

/// Elementwise max(0, x).
DenseMatrix relu(DenseMatrix x);

}  // namespace mrc

#endif  // MRC_MODEL_HPP
