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

#include "mrc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <thread>

#include "mrc/act_lra.hpp"
#include "mrc/error.hpp"
#include "mrc/random.hpp"
#include "mrc/tensor_io.hpp"

namespace fs = std::filesystem;

namespace mrc {

namespace {

// Seed stream reserved for the proxy split; per-layer streams use the
// layer index.
constexpr std::uint64_t kSplitStream = 0xffffffffffffffffull;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void rethrow_for_layer(const std::string& layer) {
  const std::string prefix = "layer '" + layer + "': ";
  try {
    throw;
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with(prefix)) throw;
  }
  try {
    throw;
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(prefix + e.what(), e.achievable());
  } catch (const DivergenceError& e) {
    throw DivergenceError(prefix + e.what(), e.iteration(), e.learning_rate());
  } catch (const Error& e) {
    throw Error(e.category(), prefix + e.what());
  }
}

// Runs fn(0..count-1) on up to `workers` threads. The first failing index
// (in index order, not completion order) determines the rethrown error.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<DenseMatrix> gather(const ActivationStack& stack, std::span<const std::size_t> idx) {
  std::vector<DenseMatrix> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(stack.samples.at(i));
  return out;
}

std::size_t bias_count(const std::optional<std::vector<double>>& bias) {
  return bias ? bias->size() : 0;
}

}  // namespace

ProxySplit split_proxy(std::size_t samples, std::size_t cap, double calibration_fraction,
                       std::uint64_t seed) {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw ArgumentError("split_proxy: calibration fraction must lie in (0, 1)");
  }
  const std::size_t kept = cap == 0 ? samples : std::min(cap, samples);
  if (kept < 2) {
    throw ArgumentError("split_proxy: need at least 2 proxy samples, have " +
                        std::to_string(kept));
  }
  Rng rng(derive_seed(seed, kSplitStream));
  std::vector<std::size_t> order = shuffled_indices(rng, samples);
  order.resize(kept);
  const auto want = static_cast<std::size_t>(std::llround(calibration_fraction * kept));
  const std::size_t calib = std::clamp<std::size_t>(want, 1, kept - 1);
  ProxySplit split;
  split.calibration.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(calib));
  split.held_out.assign(order.begin() + static_cast<std::ptrdiff_t>(calib), order.end());
  std::sort(split.calibration.begin(), split.calibration.end());
  std::sort(split.held_out.begin(), split.held_out.end());
  return split;
}

DenseMatrix CompressedLayer::effective_weight() const {
  DenseMatrix w = factors.product();
  if (compensation) w += compensation->product();
  return w;
}

std::size_t CompressedBundle::original_params() const noexcept {
  std::size_t total = 0;
  for (const CompressedLayer& l : layers) total += l.n * l.d;
  return total;
}

std::size_t CompressedBundle::compressed_params() const noexcept {
  std::size_t total = 0;
  for (const CompressedLayer& l : layers) total += l.factor_params();
  return total;
}

double CompressedBundle::psi() const {
  const std::size_t c = compressed_params();
  if (c == 0) throw ArgumentError("psi: bundle has no factor parameters");
  return static_cast<double>(original_params()) / static_cast<double>(c);
}

std::size_t CompressedBundle::layer_index(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  throw ArgumentError("no layer named '" + std::string(name) + "'");
}

namespace {

// Shapes, ranks, finiteness and split; no policy on psi or compensation.
void check_structure(const CompressedBundle& bundle) {
  validate(bundle.config);
  if (bundle.layers.empty()) throw ManifestError("compressed bundle has no layers");
  for (const CompressedLayer& l : bundle.layers) {
    const std::string ctx = "layer '" + l.name + "'";
    const auto& f = l.factors;
    if (f.u.rows() != l.n || f.v.rows() != l.d || f.u.cols() != f.v.cols()) {
      throw DimensionMismatchError(ctx + ": factor shapes do not match " + std::to_string(l.n) +
                                   "x" + std::to_string(l.d));
    }
    if (l.rank() < 1) throw ManifestError(ctx + ": rank must be at least 1");
    if (l.compensation) {
      const auto& c = *l.compensation;
      if (c.g.rows() != l.n || c.y.rows() != l.d || c.g.cols() != c.y.cols()) {
        throw DimensionMismatchError(ctx + ": compensation factor shapes do not match");
      }
      if (l.comp_rank() < 1 || l.comp_rank() >= l.rank()) {
        throw ManifestError(ctx + ": compensation rank " + std::to_string(l.comp_rank()) +
                            " must satisfy 1 <= q < r = " + std::to_string(l.rank()));
      }
      if (!c.g.all_finite() || !c.y.all_finite()) {
        throw NonFiniteError(ctx + ": non-finite compensation factor");
      }
    }
    if (!f.u.all_finite() || !f.v.all_finite()) throw NonFiniteError(ctx + ": non-finite factor");
    if (l.bias && l.bias->size() != l.d) {
      throw DimensionMismatchError(ctx + ": bias length does not match d");
    }
  }
  for (const auto* part : {&bundle.split.calibration, &bundle.split.held_out}) {
    for (std::size_t i : *part) {
      if (i >= bundle.proxy_samples) {
        throw ManifestError("compressed bundle: split index " + std::to_string(i) +
                            " out of range");
      }
    }
  }
  if (bundle.split.calibration.empty() || bundle.split.held_out.empty()) {
    throw ManifestError("compressed bundle: empty proxy split");
  }
}

}  // namespace

void validate(const CompressedBundle& bundle) {
  check_structure(bundle);
  if (bundle.config.compensation) {
    for (const CompressedLayer& l : bundle.layers) {
      if (!l.compensation) {
        throw ManifestError("layer '" + l.name + "': compensation factors missing");
      }
    }
  }
  // Allocation guarantees psi >= alpha; the slack only absorbs the rounding
  // of sum(n*d) / alpha.
  if (bundle.psi() < bundle.config.alpha * (1.0 - 1e-12)) {
    throw ManifestError("compressed bundle: compression factor " + fmt(bundle.psi()) +
                        " below alpha " + fmt(bundle.config.alpha));
  }
}

CompressionResult compress(const ModelBundle& model, const PipelineConfig& config) {
  validate(config);
  validate(model);
  if (model.proxy.stacks.empty()) {
    throw ArgumentError("compress: bundle carries no proxy activations");
  }
  const std::size_t count = model.layers.size();
  const ProxySplit split = split_proxy(model.proxy.sample_count(), config.proxy_cap,
                                      config.calibration_fraction, config.seed);

  std::vector<const ActivationStack*> stacks(count);
  for (std::size_t l = 0; l < count; ++l) stacks[l] = &model.proxy.stack(model.layers[l].name);

  std::vector<DenseMatrix> x_rep(count);
  std::vector<SingularSpectrum> spectra(count);
  parallel_for(count, config.workers, [&](std::size_t l) {
    try {
      x_rep[l] = representative_input(*stacks[l], split.calibration);
      spectra[l] = activation_aware_spectrum(model.layers[l], x_rep[l]);
    } catch (...) {
      rethrow_for_layer(model.layers[l].name);
    }
  });

  const std::vector<LayerShape> shapes = layer_shapes(model);
  AllocatorOptions options;
  options.gamma = config.gamma;
  options.max_iters = config.max_iters;
  if (config.compensation) {
    for (const LayerShape& s : shapes) {
      options.compensation_ranks.push_back(comp_rank(s.n, s.d, config.comp_budget_fraction));
    }
  }
  CompressionResult result;
  result.report.allocation = allocate(shapes, spectra, config.alpha, options);
  const RankConfig& ranks = result.report.allocation.ranks;

  CompressedBundle& out = result.bundle;
  out.layers.resize(count);
  out.metadata = model.metadata;
  out.config = config;
  out.split = split;
  out.proxy_samples = model.proxy.sample_count();
  result.report.errors.resize(count);
  result.report.logs.resize(count);

  parallel_for(count, config.workers, [&](std::size_t l) {
    const LayerRecord& layer = model.layers[l];
    try {
      CompressedLayer& cl = out.layers[l];
      cl.name = layer.name;
      cl.kind = layer.kind;
      cl.n = layer.n();
      cl.d = layer.d();
      cl.bias = layer.bias;
      cl.factors = factorize(layer, x_rep[l], ranks[l], config.rcond);

      const auto calib = gather(*stacks[l], split.calibration);
      const auto held = gather(*stacks[l], split.held_out);
      LayerErrors& err = result.report.errors[l];
      err.layer = layer.name;
      err.rank = ranks[l];
      err.calibration_before = layer_output_error(layer, cl.factors, nullptr, calib).mean;
      err.held_out_before = layer_output_error(layer, cl.factors, nullptr, held).mean;
      err.calibration_after = err.calibration_before;
      err.held_out_after = err.held_out_before;
      if (config.compensation) {
        GdConfig gd = config.gd;
        gd.seed = derive_seed(config.seed, l);
        CompensationResult comp =
            compensate(layer, cl.factors, calib, options.compensation_ranks[l], gd);
        cl.compensation = std::move(comp.factors);
        result.report.logs[l] = std::move(comp.log);
        err.comp_rank = cl.comp_rank();
        err.calibration_after =
            layer_output_error(layer, cl.factors, &*cl.compensation, calib).mean;
        err.held_out_after = layer_output_error(layer, cl.factors, &*cl.compensation, held).mean;
      }
    } catch (...) {
      rethrow_for_layer(layer.name);
    }
  });

  validate(out);
  return result;
}

void write_compression_reports(const CompressionResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  const CompressedBundle& bundle = result.bundle;
  write_file(dir / "allocation_trace.csv", trace_csv(result.report.allocation.trace));

  std::string errors =
      "layer,n,d,rank,comp_rank,calibration_before,calibration_after,held_out_before,"
      "held_out_after\n";
  double sum_before = 0.0;
  double sum_after = 0.0;
  for (std::size_t l = 0; l < result.report.errors.size(); ++l) {
    const LayerErrors& e = result.report.errors[l];
    const CompressedLayer& cl = bundle.layers[l];
    errors += e.layer + "," + std::to_string(cl.n) + "," + std::to_string(cl.d) + "," +
              std::to_string(e.rank) + "," + std::to_string(e.comp_rank) + "," +
              fmt(e.calibration_before) + "," + fmt(e.calibration_after) + "," +
              fmt(e.held_out_before) + "," + fmt(e.held_out_after) + "\n";
    sum_before += e.held_out_before;
    sum_after += e.held_out_after;
  }
  write_file(dir / "layer_errors.csv", errors);

  std::string convergence = "layer,iteration,batch_loss,full_loss\n";
  for (std::size_t l = 0; l < result.report.logs.size(); ++l) {
    if (bundle.layers[l].compensation) {
      convergence += convergence_csv(bundle.layers[l].name, result.report.logs[l]);
    }
  }
  write_file(dir / "convergence.csv", convergence);

  std::string summary;
  summary += "layers: " + std::to_string(bundle.layers.size()) + "\n";
  summary += "alpha: " + fmt(bundle.config.alpha) + "\n";
  summary += "psi: " + fmt(bundle.psi()) + "\n";
  summary += "original_params: " + std::to_string(bundle.original_params()) + "\n";
  summary += "compressed_params: " + std::to_string(bundle.compressed_params()) + "\n";
  summary += "allocation_steps: " + std::to_string(result.report.allocation.trace.steps.size()) +
             "\n";
  summary += "calibration_samples: " + std::to_string(bundle.split.calibration.size()) + "\n";
  summary += "held_out_samples: " + std::to_string(bundle.split.held_out.size()) + "\n";
  summary += "held_out_error_sum_before: " + fmt(sum_before) + "\n";
  summary += "held_out_error_sum_after: " + fmt(sum_after) + "\n";
  write_file(dir / "summary.txt", summary);
}

EvaluationReport evaluate(const ModelBundle& original, const CompressedBundle& compressed) {
  validate(original);
  check_structure(compressed);
  if (original.layers.size() != compressed.layers.size()) {
    throw ManifestError("evaluate: original has " + std::to_string(original.layers.size()) +
                        " layers, compressed has " + std::to_string(compressed.layers.size()));
  }
  if (original.proxy.stacks.empty()) {
    throw ArgumentError("evaluate: original bundle carries no proxy activations");
  }
  if (original.proxy.sample_count() != compressed.proxy_samples) {
    throw DimensionMismatchError("evaluate: original has " +
                                 std::to_string(original.proxy.sample_count()) +
                                 " proxy samples, compressed bundle was built from " +
                                 std::to_string(compressed.proxy_samples));
  }
  for (std::size_t l = 0; l < original.layers.size(); ++l) {
    const LayerRecord& a = original.layers[l];
    const CompressedLayer& b = compressed.layers[l];
    if (a.name != b.name) {
      throw ManifestError("evaluate: layer " + std::to_string(l) + " is '" + a.name +
                          "' in the original but '" + b.name + "' in the compressed bundle");
    }
    if (a.n() != b.n || a.d() != b.d) {
      throw DimensionMismatchError("layer '" + a.name + "': shape differs between bundles");
    }
  }

  EvaluationReport report;
  const auto& held = compressed.split.held_out;
  const auto& calib = compressed.split.calibration;
  report.held_out_samples = held.size();
  report.layers.resize(original.layers.size());
  parallel_for(original.layers.size(), compressed.config.workers, [&](std::size_t l) {
    const LayerRecord& layer = original.layers[l];
    const CompressedLayer& cl = compressed.layers[l];
    try {
      const ActivationStack& stack = original.proxy.stack(layer.name);
      const auto held_samples = gather(stack, held);
      const auto calib_samples = gather(stack, calib);
      const CompensationFactors* comp = cl.compensation ? &*cl.compensation : nullptr;
      LayerEvaluation& e = report.layers[l];
      e.layer = layer.name;
      e.n = cl.n;
      e.d = cl.d;
      e.rank = cl.rank();
      e.comp_rank = cl.comp_rank();
      e.error_without = layer_output_error(layer, cl.factors, nullptr, held_samples).mean;
      e.error_with = layer_output_error(layer, cl.factors, comp, held_samples).mean;
      e.calibration_with = layer_output_error(layer, cl.factors, comp, calib_samples).mean;
    } catch (...) {
      rethrow_for_layer(layer.name);
    }
  });
  for (const LayerEvaluation& e : report.layers) {
    report.sum_without += e.error_without;
    report.sum_with += e.error_with;
  }

  auto topology = original.metadata.find(std::string(kTopologyKey));
  if (topology != original.metadata.end() && topology->second == kTopologyChain) {
    std::vector<LayerRecord> replaced(original.layers.size());
    for (std::size_t l = 0; l < replaced.size(); ++l) {
      replaced[l].name = compressed.layers[l].name;
      replaced[l].weight = compressed.layers[l].effective_weight();
      replaced[l].bias = compressed.layers[l].bias;
    }
    const ActivationStack& first = original.proxy.stack(original.layers.front().name);
    double total = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t i : held) {
      DenseMatrix xo = first.samples.at(i);
      DenseMatrix xc = xo;
      for (std::size_t l = 0; l < replaced.size(); ++l) {
        DenseMatrix yo = apply_layer(original.layers[l], xo);
        DenseMatrix yc = apply_layer(replaced[l], xc);
        if (l + 1 == replaced.size()) {
          const double ref = squared_norm(yo);
          if (ref > 0.0) {
            total += squared_distance(yc, yo) / ref;
            ++evaluated;
          }
        } else {
          xo = relu(std::move(yo));
          xc = relu(std::move(yc));
        }
      }
    }
    if (evaluated > 0) report.end_to_end = total / static_cast<double>(evaluated);
  }

  report.original_params = compressed.original_params();
  report.compressed_params = compressed.compressed_params();
  report.psi = compressed.psi();
  return report;
}

std::string evaluation_csv(const EvaluationReport& report) {
  std::string out = "layer,n,d,rank,comp_rank,held_out_without,held_out_with,calibration_with\n";
  for (const LayerEvaluation& e : report.layers) {
    out += e.layer + "," + std::to_string(e.n) + "," + std::to_string(e.d) + "," +
           std::to_string(e.rank) + "," + std::to_string(e.comp_rank) + "," +
           fmt(e.error_without) + "," + fmt(e.error_with) + "," + fmt(e.calibration_with) + "\n";
  }
  return out;
}

std::string evaluation_summary(const EvaluationReport& report) {
  std::string out;
  out += "held_out_samples: " + std::to_string(report.held_out_samples) + "\n";
  out += "error_sum_without_compensation: " + fmt(report.sum_without) + "\n";
  out += "error_sum_with_compensation: " + fmt(report.sum_with) + "\n";
  out += "end_to_end_deviation: " + (report.end_to_end ? fmt(*report.end_to_end) : "n/a") + "\n";
  out += "original_params: " + std::to_string(report.original_params) + "\n";
  out += "compressed_params: " + std::to_string(report.compressed_params) + "\n";
  out += "psi: " + fmt(report.psi) + "\n";
  return out;
}

CompressedBundle quantize_bundle(const CompressedBundle& bundle, const QuantSettings& settings) {
  CompressedBundle out = bundle;
  out.config.quant = settings;
  validate(out.config);
  for (CompressedLayer& l : out.layers) {
    auto round_trip = [&](DenseMatrix& m) {
      QuantizedMatrix q = quantize(m, settings.bits, settings.mode, settings.axis);
      m = dequantize(q);
      return q;
    };
    QuantizedFactors qf;
    qf.u = round_trip(l.factors.u);
    qf.v = round_trip(l.factors.v);
    if (l.compensation) {
      qf.g = round_trip(l.compensation->g);
      qf.y = round_trip(l.compensation->y);
    }
    l.quantized = std::move(qf);
  }
  return out;
}

SizeReport size_report(const ModelBundle& model, unsigned bits) {
  SizeReport r;
  for (const LayerRecord& l : model.layers) r.params += l.n() * l.d() + bias_count(l.bias);
  const StorageItem item{r.params, bits};
  r.bytes = storage_bytes({&item, 1});
  r.fp16_baseline_bytes = static_cast<double>(r.params) * 2.0;
  r.reduction_vs_fp16 = r.bytes > 0.0 ? r.fp16_baseline_bytes / r.bytes : 0.0;
  return r;
}

SizeReport size_report(const CompressedBundle& bundle, unsigned float_bits) {
  SizeReport r;
  std::vector<StorageItem> items;
  std::size_t original = 0;
  for (const CompressedLayer& l : bundle.layers) {
    const std::size_t biases = bias_count(l.bias);
    original += l.n * l.d + biases;
    r.params += l.factor_params() + biases;
    items.push_back({biases, float_bits});
    if (l.quantized) {
      auto add = [&](const QuantizedMatrix& q) {
        items.push_back({q.codes.size(), q.bits});
        items.push_back({2 * q.channels(), kSidecarBits});
      };
      add(l.quantized->u);
      add(l.quantized->v);
      if (l.quantized->g) add(*l.quantized->g);
      if (l.quantized->y) add(*l.quantized->y);
    } else {
      items.push_back({l.factor_params(), float_bits});
    }
  }
  r.bytes = storage_bytes(items);
  r.fp16_baseline_bytes = static_cast<double>(original) * 2.0;
  r.reduction_vs_fp16 = r.bytes > 0.0 ? r.fp16_baseline_bytes / r.bytes : 0.0;
  return r;
}

std::string size_summary(const SizeReport& report) {
  std::string out;
  out += "params: " + std::to_string(report.params) + "\n";
  out += "bytes: " + fmt(report.bytes) + "\n";
  out += "fp16_baseline_bytes: " + fmt(report.fp16_baseline_bytes) + "\n";
  out += "size_fraction_of_fp16: " +
         fmt(report.fp16_baseline_bytes > 0.0 ? report.bytes / report.fp16_baseline_bytes : 0.0) +
         "\n";
  out += "reduction_vs_fp16: " + fmt(report.reduction_vs_fp16) + "\n";
  return out;
}

CostReport cost_report(const CompressedBundle& bundle, std::size_t sequence_length) {
  std::vector<CostInput> inputs;
  for (const CompressedLayer& l : bundle.layers) {
    inputs.push_back({l.name, l.n, l.d, l.rank(), l.comp_rank()});
  }
  return cost_report(inputs, sequence_length);
}

}  // namespace mrc
