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

#include "mrc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mrc/error.hpp"
#include "mrc/random.hpp"

namespace mrc {

namespace {

constexpr double kSharedInputDecay = 0.85;
constexpr double kSampleInputDecay = 0.6;
constexpr double kSampleInputScale = 0.7;

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// diag(decay^j) * Q for a random orthogonal Q.
DenseMatrix anisotropic_mixer(Rng& rng, std::size_t n, double decay) {
  DenseMatrix q = random_orthogonal(rng, n);
  double scale = 1.0;
  for (std::size_t j = 0; j < n; ++j, scale *= decay) {
    for (double& v : q.row(j)) v *= scale;
  }
  return q;
}

}  // namespace

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Qkv: return "qkv";
    case LayerKind::AttnProj: return "attn_proj";
    case LayerKind::Mlp1: return "mlp1";
    case LayerKind::Mlp2: return "mlp2";
    case LayerKind::Generic: return "generic";
  }
  return "generic";
}

LayerKind parse_layer_kind(std::string_view text) {
  for (LayerKind k : {LayerKind::Qkv, LayerKind::AttnProj, LayerKind::Mlp1, LayerKind::Mlp2,
                      LayerKind::Generic}) {
    if (to_string(k) == text) return k;
  }
  throw ManifestError("unknown layer kind '" + std::string(text) + "'");
}

const ActivationStack& ProxyDataset::stack(std::string_view layer) const {
  auto it = std::find_if(stacks.begin(), stacks.end(),
                         [&](const ActivationStack& s) { return s.layer == layer; });
  if (it == stacks.end()) {
    throw ArgumentError("no proxy activations for layer '" + std::string(layer) + "'");
  }
  return *it;
}

std::size_t ModelBundle::layer_index(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  throw ArgumentError("unknown layer '" + std::string(name) + "'");
}

void validate(const ModelBundle& bundle) {
  std::set<std::string> names;
  for (const LayerRecord& layer : bundle.layers) {
    if (layer.name.empty()) throw ManifestError("layer with empty name");
    if (!names.insert(layer.name).second) {
      throw ManifestError("duplicate layer name '" + layer.name + "'");
    }
    if (layer.weight.empty()) {
      throw DimensionMismatchError("layer '" + layer.name + "': empty weight");
    }
    if (!layer.weight.all_finite()) {
      throw NonFiniteError("layer '" + layer.name + "': non-finite weight entry");
    }
    if (layer.bias) {
      if (layer.bias->size() != layer.d()) {
        throw DimensionMismatchError("layer '" + layer.name + "': bias length " +
                                     std::to_string(layer.bias->size()) + ", expected " +
                                     std::to_string(layer.d()));
      }
      if (!std::all_of(layer.bias->begin(), layer.bias->end(),
                       [](double v) { return std::isfinite(v); })) {
        throw NonFiniteError("layer '" + layer.name + "': non-finite bias entry");
      }
    }
  }

  const auto& stacks = bundle.proxy.stacks;
  if (stacks.empty()) return;
  if (stacks.size() != bundle.layers.size()) {
    throw ManifestError("proxy covers " + std::to_string(stacks.size()) + " layers, model has " +
                        std::to_string(bundle.layers.size()));
  }
  const std::size_t count = stacks.front().samples.size();
  for (std::size_t l = 0; l < stacks.size(); ++l) {
    const LayerRecord& layer = bundle.layers[l];
    const ActivationStack& st = stacks[l];
    if (st.layer != layer.name) {
      throw ManifestError("proxy stack " + std::to_string(l) + " is for '" + st.layer +
                          "', expected '" + layer.name + "'");
    }
    if (st.samples.size() != count) {
      throw DimensionMismatchError("layer '" + layer.name + "': " +
                                   std::to_string(st.samples.size()) + " proxy samples, expected " +
                                   std::to_string(count));
    }
    for (const DenseMatrix& x : st.samples) {
      if (x.cols() != layer.n()) {
        throw DimensionMismatchError("layer '" + layer.name + "': activation is " +
                                     dims(x.rows(), x.cols()) + ", expected " +
                                     std::to_string(layer.n()) + " columns");
      }
      if (x.rows() != st.samples.front().rows()) {
        throw DimensionMismatchError("layer '" + layer.name +
                                     "': activation samples differ in token count");
      }
      if (!x.all_finite()) {
        throw NonFiniteError("layer '" + layer.name + "': non-finite activation entry");
      }
    }
  }
}

DenseMatrix representative_input(const ProxyDataset& proxy, std::string_view layer) {
  const ActivationStack& st = proxy.stack(layer);
  std::vector<std::size_t> all(st.samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return representative_input(st, all);
}

DenseMatrix representative_input(const ActivationStack& stack,
                                 std::span<const std::size_t> indices) {
  if (indices.empty()) {
    throw ArgumentError("representative_input: no samples for layer '" + stack.layer + "'");
  }
  DenseMatrix sum = stack.samples.at(indices.front());
  for (std::size_t i = 1; i < indices.size(); ++i) sum += stack.samples.at(indices[i]);
  sum *= 1.0 / static_cast<double>(indices.size());
  return sum;
}

DenseMatrix apply_layer(const LayerRecord& layer, const DenseMatrix& x) {
  DenseMatrix out = matmul(x, layer.weight);
  if (layer.bias) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += (*layer.bias)[c];
    }
  }
  return out;
}

DenseMatrix relu(DenseMatrix x) {
  for (double& v : x.data()) v = std::max(0.0, v);
  return x;
}

ModelBundle gen_synthetic(const SyntheticSpec& spec) {
  if (spec.layers < 1) throw ArgumentError("gen_synthetic: need at least one layer");
  if (spec.n < 2 || spec.d < 2 || spec.tokens < 2) {
    throw ArgumentError("gen_synthetic: n, d and tokens must be >= 2");
  }
  if (spec.samples < 1) throw ArgumentError("gen_synthetic: need at least one sample");
  if (!(spec.spectrum_decay > 0.0 && spec.spectrum_decay <= 1.0)) {
    throw ArgumentError("gen_synthetic: spectrum_decay must lie in (0, 1]");
  }

  Rng rng(spec.seed);
  ModelBundle bundle;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const bool even = l % 2 == 0;
    const std::size_t rows = even ? spec.n : spec.d;
    const std::size_t cols = even ? spec.d : spec.n;
    const std::size_t k = std::min(rows, cols);

    DenseMatrix left = random_orthogonal(rng, rows).top_rows(k).transposed();
    const DenseMatrix right = random_orthogonal(rng, cols).top_rows(k);
    for (std::size_t r = 0; r < rows; ++r) {
      double sigma = kSyntheticWeightScale;
      for (double& v : left.row(r)) {
        v *= sigma;
        sigma *= spec.spectrum_decay;
      }
    }

    LayerRecord layer;
    layer.kind = even ? LayerKind::Mlp1 : LayerKind::Mlp2;
    layer.name = "layer" + std::to_string(l) + "." + std::string(to_string(layer.kind));
    layer.weight = matmul(left, right);
    bundle.layers.push_back(std::move(layer));
  }

  const DenseMatrix mixer = anisotropic_mixer(rng, spec.n, kSharedInputDecay);
  const DenseMatrix shared = matmul(gaussian_matrix(rng, spec.tokens, spec.n), mixer);
  const DenseMatrix sample_mixer = anisotropic_mixer(rng, spec.n, kSampleInputDecay);
  std::vector<DenseMatrix> current;
  current.reserve(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    current.push_back(shared + matmul(gaussian_matrix(rng, spec.tokens, spec.n, kSampleInputScale), sample_mixer));
  }

  for (std::size_t l = 0; l < spec.layers; ++l) {
    const LayerRecord& layer = bundle.layers[l];
    bundle.proxy.stacks.push_back(ActivationStack{layer.name, current});
    if (l + 1 < spec.layers) {
      for (DenseMatrix& x : current) x = relu(apply_layer(layer, x));
    }
  }

  bundle.metadata[std::string(kTopologyKey)] = std::string(kTopologyChain);
  bundle.metadata["generator.seed"] = std::to_string(spec.seed);
  bundle.metadata["generator.spectrum_decay"] = std::to_string(spec.spectrum_decay);
  return bundle;
}

}  // namespace mrc
