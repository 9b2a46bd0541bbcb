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

#ifndef MRC_PIPELINE_HPP
#define MRC_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/allocator.hpp"
#include "mrc/compensation.hpp"
#include "mrc/cost.hpp"
#include "mrc/factors.hpp"
#include "mrc/linalg.hpp"
#include "mrc/model.hpp"
#include "mrc/quant.hpp"

namespace mrc {

struct QuantSettings {
  unsigned bits = 8;
  QuantMode mode = QuantMode::AffineMinMax;
  ChannelAxis axis = ChannelAxis::Column;
};

struct PipelineConfig {
  double alpha = 2.0;
  double gamma = 80.0;
  std::size_t max_iters = 500;
  GdConfig gd;
  bool compensation = true;
  double comp_budget_fraction = 0.05;
  /// Upper bound on proxy samples used; 0 keeps all of them.
  std::size_t proxy_cap = 0;
  double calibration_fraction = 0.8;
  double rcond = kDefaultRcond;
  QuantSettings quant;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Throws ArgumentError naming the first invalid field.
void validate(const PipelineConfig& config);

/// Sets one field from its key=value spelling (see config_keys()).
void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines; blank lines and '#' comments are ignored.
/// Unknown keys and malformed values raise ArgumentError with the line number.
void apply_config_text(PipelineConfig& config, std::string_view text);

/// Canonical key=value rendering; apply_config_text() reads it back exactly.
std::string config_to_text(const PipelineConfig& config);

const std::vector<std::string>& config_keys();

/// Seeded partition of the proxy sample indices, both halves sorted.
struct ProxySplit {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> held_out;
};

/// Shuffles [0, samples), keeps the first min(cap, samples) (cap 0 = all) and
/// sends round(fraction * kept) of them, clamped to [1, kept - 1], to
/// calibration. Needs at least two samples.
ProxySplit split_proxy(std::size_t samples, std::size_t cap, double calibration_fraction,
                       std::uint64_t seed);

struct QuantizedFactors {
  QuantizedMatrix u;
  QuantizedMatrix v;
  std::optional<QuantizedMatrix> g;
  std::optional<QuantizedMatrix> y;
};

struct CompressedLayer {
  std::string name;
  LayerKind kind = LayerKind::Generic;
  std::size_t n = 0;
  std::size_t d = 0;
  LowRankFactors factors;
  /// Absent when compensation is disabled (q = 0).
  std::optional<CompensationFactors> compensation;
  std::optional<std::vector<double>> bias;
  /// Set after quantization; `factors` and `compensation` then hold the
  /// dequantized values.
  std::optional<QuantizedFactors> quantized;

  std::size_t rank() const noexcept { return factors.rank(); }
  std::size_t comp_rank() const noexcept { return compensation ? compensation->rank() : 0; }
  std::size_t factor_params() const noexcept { return (n + d) * (rank() + comp_rank()); }
  /// u v^T + g y^T
  DenseMatrix effective_weight() const;
};

struct CompressedBundle {
  std::vector<CompressedLayer> layers;
  std::map<std::string, std::string> metadata;
  PipelineConfig config;
  ProxySplit split;
  std::size_t proxy_samples = 0;

  std::size_t original_params() const noexcept;
  std::size_t compressed_params() const noexcept;
  /// Original weight parameters over factor parameters, compensation included.
  double psi() const;
  std::size_t layer_index(std::string_view name) const;
};

/// Checks q < r, shapes, finiteness and the recorded compression factor.
void validate(const CompressedBundle& bundle);

void save_compressed(const CompressedBundle& bundle, const std::filesystem::path& dir);
CompressedBundle load_compressed(const std::filesystem::path& dir);

struct LayerErrors {
  std::string layer;
  std::size_t rank = 0;
  std::size_t comp_rank = 0;
  double calibration_before = 0.0;
  double calibration_after = 0.0;
  double held_out_before = 0.0;
  double held_out_after = 0.0;
};

struct CompressionReport {
  Allocation allocation;
  std::vector<LayerErrors> errors;
  std::vector<CompensationLog> logs;
};

struct CompressionResult {
  CompressedBundle bundle;
  CompressionReport report;
};

/// Full pipeline: split, representative inputs, spectra, allocation, then
/// per-layer factorization and compensation on `config.workers` threads.
/// Errors raised for a layer keep their category and name the layer.
CompressionResult compress(const ModelBundle& model, const PipelineConfig& config);

/// allocation_trace.csv, layer_errors.csv, convergence.csv, summary.txt.
void write_compression_reports(const CompressionResult& result, const std::filesystem::path& dir);

/// Writes the bundle to `dir` with its reports under `dir/reports`, as one
/// atomic directory swap.
void save_compression(const CompressionResult& result, const std::filesystem::path& dir);

struct LayerEvaluation {
  std::string layer;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t rank = 0;
  std::size_t comp_rank = 0;
  /// Held-out normalized output error without and with g y^T.
  double error_without = 0.0;
  double error_with = 0.0;
  double calibration_with = 0.0;
};

struct EvaluationReport {
  std::vector<LayerEvaluation> layers;
  double sum_without = 0.0;
  double sum_with = 0.0;
  /// Mean relative squared deviation of the final chain output over held-out
  /// samples; only for bundles tagged as a ReLU chain.
  std::optional<double> end_to_end;
  std::size_t held_out_samples = 0;
  std::size_t original_params = 0;
  std::size_t compressed_params = 0;
  double psi = 0.0;
};

/// Throws ManifestError / DimensionMismatchError when the layer sets differ.
EvaluationReport evaluate(const ModelBundle& original, const CompressedBundle& compressed);

std::string evaluation_csv(const EvaluationReport& report);
std::string evaluation_summary(const EvaluationReport& report);

/// Quantizes u, v, g, y of every layer and replaces the float factors with
/// their dequantized values.
CompressedBundle quantize_bundle(const CompressedBundle& bundle, const QuantSettings& settings);

/// Bits charged per scale and per zero-point of a quantized channel.
inline constexpr unsigned kSidecarBits = 32;

/// Every weight and bias at `bits`.
SizeReport size_report(const ModelBundle& model, unsigned bits = 16);

/// Factors at `float_bits`, or codes plus per-channel sidecars when
/// quantized; biases at `float_bits`. The baseline is the original FP16 size.
SizeReport size_report(const CompressedBundle& bundle, unsigned float_bits = 16);

std::string size_summary(const SizeReport& report);

CostReport cost_report(const CompressedBundle& bundle, std::size_t sequence_length);

}  // namespace mrc

#endif  // MRC_PIPELINE_HPP
