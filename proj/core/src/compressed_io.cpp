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

#include <cmath>

#include "manifest_util.hpp"
#include "mrc/bundle_io.hpp"
#include "mrc/error.hpp"
#include "mrc/pipeline.hpp"
#include "mrc/tensor_io.hpp"

namespace fs = std::filesystem;

namespace mrc {

namespace {

using detail::field;
using detail::json;

constexpr const char* kFormat = "mrc-compressed";
constexpr int kVersion = 1;

DenseMatrix row_vector(const std::vector<double>& v) { return DenseMatrix(1, v.size(), v); }

json write_factor(const fs::path& out, const std::string& stem, const char* part,
                  const DenseMatrix& m, const QuantizedMatrix* q) {
  json entry;
  const std::string base = stem + "." + part;
  if (q == nullptr) {
    entry["dtype"] = std::string(kTagF64);
    entry["data"] = base + ".mrt";
    write_file(out / (base + ".mrt"), encode_matrix(m));
    return entry;
  }
  entry["dtype"] = std::string(kTagU8q);
  entry["data"] = base + ".mrt";
  entry["scales"] = base + ".scale.mrt";
  entry["zeros"] = base + ".zero.mrt";
  write_file(out / (base + ".mrt"),
             encode_codes(CodeMatrix{static_cast<std::uint32_t>(q->rows),
                                     static_cast<std::uint32_t>(q->cols), q->codes}));
  write_file(out / (base + ".scale.mrt"), encode_matrix(row_vector(q->scales)));
  write_file(out / (base + ".zero.mrt"), encode_matrix(row_vector(q->zeros)));
  return entry;
}

struct LoadedFactor {
  DenseMatrix dense;
  std::optional<QuantizedMatrix> quantized;
};

LoadedFactor read_factor(const fs::path& dir, const json& entry, const std::string& ctx,
                         const QuantSettings* quant) {
  const std::string dtype = field<std::string>(entry, "dtype", ctx);
  const std::string data = field<std::string>(entry, "data", ctx);
  LoadedFactor out;
  if (dtype == kTagF64) {
    out.dense = decode_matrix(read_file(dir / data), ctx);
    return out;
  }
  if (dtype != kTagU8q) throw ManifestError(ctx + ": unsupported dtype '" + dtype + "'");
  if (quant == nullptr) throw ManifestError(ctx + ": quantized factor in an unquantized bundle");

  const CodeMatrix codes = decode_codes(read_file(dir / data), ctx);
  const DenseMatrix scales =
      decode_matrix(read_file(dir / field<std::string>(entry, "scales", ctx)), ctx + " scales");
  const DenseMatrix zeros =
      decode_matrix(read_file(dir / field<std::string>(entry, "zeros", ctx)), ctx + " zeros");
  QuantizedMatrix q;
  q.rows = codes.rows;
  q.cols = codes.cols;
  q.codes = codes.codes;
  q.bits = quant->bits;
  q.axis = quant->axis;
  q.scales.assign(scales.data().begin(), scales.data().end());
  q.zeros.assign(zeros.data().begin(), zeros.data().end());
  const std::size_t channels = q.axis == ChannelAxis::Column ? q.cols : q.rows;
  if (scales.rows() != 1 || zeros.rows() != 1 || q.scales.size() != channels ||
      q.zeros.size() != channels) {
    throw DimensionMismatchError(ctx + ": expected " + std::to_string(channels) +
                                 " per-channel scales and zeros");
  }
  const unsigned max_code = (1u << q.bits) - 1u;
  for (std::uint8_t c : q.codes) {
    if (c > max_code) throw ManifestError(ctx + ": code exceeds the declared bit width");
  }
  for (double s : q.scales) {
    if (!(s > 0.0)) throw ManifestError(ctx + ": non-positive scale");
  }
  out.dense = dequantize(q);
  out.quantized = std::move(q);
  return out;
}

void write_bundle_files(const CompressedBundle& bundle, const fs::path& out) {
  json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["metadata"] = bundle.metadata;
  json config = json::object();
  {
    const std::string text = config_to_text(bundle.config);
    std::size_t start = 0;
    while (start < text.size()) {
      const auto nl = text.find('\n', start);
      const std::string line = text.substr(start, nl - start);
      const auto eq = line.find(" = ");
      // Thread count never changes results, so it stays out of the bundle.
      if (line.substr(0, eq) != "workers") config[line.substr(0, eq)] = line.substr(eq + 3);
      start = nl + 1;
    }
  }
  manifest["config"] = std::move(config);
  manifest["proxy_samples"] = bundle.proxy_samples;
  manifest["split"] = {{"calibration", bundle.split.calibration},
                       {"held_out", bundle.split.held_out}};
  manifest["original_params"] = bundle.original_params();
  manifest["compressed_params"] = bundle.compressed_params();
  manifest["psi"] = bundle.psi();

  const bool quantized = !bundle.layers.empty() && bundle.layers.front().quantized.has_value();
  if (quantized) {
    manifest["quantization"] = {{"bits", bundle.config.quant.bits},
                                {"mode", std::string(to_string(bundle.config.quant.mode))},
                                {"channel_axis", std::string(to_string(bundle.config.quant.axis))}};
  } else {
    manifest["quantization"] = nullptr;
  }

  json layers = json::array();
  for (std::size_t l = 0; l < bundle.layers.size(); ++l) {
    const CompressedLayer& cl = bundle.layers[l];
    if (cl.quantized.has_value() != quantized) {
      throw ArgumentError("layer '" + cl.name + "': mixed quantized and float layers");
    }
    const std::string stem = layer_file_stem(l, cl.name);
    const QuantizedFactors* q = cl.quantized ? &*cl.quantized : nullptr;
    json entry;
    entry["name"] = cl.name;
    entry["kind"] = std::string(to_string(cl.kind));
    entry["n"] = cl.n;
    entry["d"] = cl.d;
    entry["rank"] = cl.rank();
    entry["comp_rank"] = cl.comp_rank();
    entry["u"] = write_factor(out, stem, "u", cl.factors.u, q ? &q->u : nullptr);
    entry["v"] = write_factor(out, stem, "v", cl.factors.v, q ? &q->v : nullptr);
    if (cl.compensation) {
      entry["g"] = write_factor(out, stem, "g", cl.compensation->g, q ? &*q->g : nullptr);
      entry["y"] = write_factor(out, stem, "y", cl.compensation->y, q ? &*q->y : nullptr);
    } else {
      entry["g"] = nullptr;
      entry["y"] = nullptr;
    }
    if (cl.bias) {
      entry["bias"] = stem + ".bias.mrt";
      write_file(out / (stem + ".bias.mrt"), encode_matrix(row_vector(*cl.bias)));
    } else {
      entry["bias"] = nullptr;
    }
    layers.push_back(std::move(entry));
  }
  manifest["layers"] = std::move(layers);
  write_file(out / kManifestName, manifest.dump(2) + "\n");
}

}  // namespace

void save_compressed(const CompressedBundle& bundle, const fs::path& dir) {
  validate(bundle);
  write_directory_atomically(dir, [&](const fs::path& out) { write_bundle_files(bundle, out); });
}

void save_compression(const CompressionResult& result, const fs::path& dir) {
  validate(result.bundle);
  write_directory_atomically(dir, [&](const fs::path& out) {
    write_bundle_files(result.bundle, out);
    write_compression_reports(result, out / "reports");
  });
}

CompressedBundle load_compressed(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw MissingFileError("compressed bundle directory " + dir.string() + " not found");
  }
  const json manifest = detail::parse_manifest(read_file(dir / kManifestName));
  if (field<std::string>(manifest, "format", "manifest") != kFormat) {
    throw ManifestError("manifest: not a compressed bundle (format field)");
  }
  if (field<int>(manifest, "version", "manifest") != kVersion) {
    throw ManifestError("manifest: unsupported version");
  }

  CompressedBundle bundle;
  bundle.metadata = field<std::map<std::string, std::string>>(manifest, "metadata", "manifest");
  const auto config = field<std::map<std::string, std::string>>(manifest, "config", "manifest");
  for (const auto& [key, value] : config) {
    try {
      apply_config_entry(bundle.config, key, value);
    } catch (const ArgumentError& e) {
      throw ManifestError(std::string("manifest config: ") + e.what());
    }
  }
  bundle.proxy_samples = field<std::size_t>(manifest, "proxy_samples", "manifest");
  const json split = field<json>(manifest, "split", "manifest");
  bundle.split.calibration = field<std::vector<std::size_t>>(split, "calibration", "manifest split");
  bundle.split.held_out = field<std::vector<std::size_t>>(split, "held_out", "manifest split");

  std::optional<QuantSettings> quant;
  const json qjson = field<json>(manifest, "quantization", "manifest");
  if (!qjson.is_null()) {
    QuantSettings s;
    s.bits = field<unsigned>(qjson, "bits", "manifest quantization");
    s.mode = parse_quant_mode(field<std::string>(qjson, "mode", "manifest quantization"));
    s.axis = parse_channel_axis(field<std::string>(qjson, "channel_axis", "manifest quantization"));
    if (s.bits < 2 || s.bits > 8) throw ManifestError("manifest quantization: bad bit width");
    quant = s;
  }

  const json layers = field<json>(manifest, "layers", "manifest");
  if (!layers.is_array()) throw ManifestError("manifest: 'layers' is not an array");
  for (const json& entry : layers) {
    CompressedLayer cl;
    cl.name = field<std::string>(entry, "name", "manifest layer");
    const std::string ctx = "layer '" + cl.name + "'";
    cl.kind = parse_layer_kind(field<std::string>(entry, "kind", ctx));
    cl.n = field<std::size_t>(entry, "n", ctx);
    cl.d = field<std::size_t>(entry, "d", ctx);
    const auto rank = field<std::size_t>(entry, "rank", ctx);
    const auto comp_rank = field<std::size_t>(entry, "comp_rank", ctx);
    const QuantSettings* qs = quant ? &*quant : nullptr;

    LoadedFactor u = read_factor(dir, field<json>(entry, "u", ctx), ctx + " u", qs);
    LoadedFactor v = read_factor(dir, field<json>(entry, "v", ctx), ctx + " v", qs);
    cl.factors = LowRankFactors{std::move(u.dense), std::move(v.dense)};
    QuantizedFactors qf;
    if (quant) {
      if (!u.quantized || !v.quantized) throw ManifestError(ctx + ": float factor in a quantized bundle");
      qf.u = std::move(*u.quantized);
      qf.v = std::move(*v.quantized);
    }
    const json g_entry = field<json>(entry, "g", ctx);
    const json y_entry = field<json>(entry, "y", ctx);
    if (g_entry.is_null() != y_entry.is_null()) {
      throw ManifestError(ctx + ": g and y must both be present or both absent");
    }
    if (!g_entry.is_null()) {
      LoadedFactor g = read_factor(dir, g_entry, ctx + " g", qs);
      LoadedFactor y = read_factor(dir, y_entry, ctx + " y", qs);
      cl.compensation = CompensationFactors{std::move(g.dense), std::move(y.dense)};
      if (quant) {
        if (!g.quantized || !y.quantized) throw ManifestError(ctx + ": float factor in a quantized bundle");
        qf.g = std::move(*g.quantized);
        qf.y = std::move(*y.quantized);
      }
    }
    if (quant) cl.quantized = std::move(qf);
    if (entry.contains("bias") && !entry.at("bias").is_null()) {
      DenseMatrix b = decode_matrix(read_file(dir / field<std::string>(entry, "bias", ctx)),
                                    ctx + " bias");
      if (b.rows() != 1 || b.cols() != cl.d) {
        throw DimensionMismatchError(ctx + ": bias shape does not match d");
      }
      cl.bias = std::vector<double>(b.data().begin(), b.data().end());
    }
    if (cl.factors.u.rows() != cl.n || cl.factors.v.rows() != cl.d) {
      throw DimensionMismatchError(ctx + ": factor shapes do not match the declared " +
                                   std::to_string(cl.n) + "x" + std::to_string(cl.d));
    }
    if (cl.rank() != rank || cl.comp_rank() != comp_rank) {
      throw DimensionMismatchError(ctx + ": declared ranks do not match the stored factors");
    }
    bundle.layers.push_back(std::move(cl));
  }

  try {
    validate(bundle);
  } catch (const ArgumentError& e) {
    throw ManifestError(std::string("manifest config: ") + e.what());
  }
  const double recorded = field<double>(manifest, "psi", "manifest");
  if (std::abs(recorded - bundle.psi()) > 1e-12 * bundle.psi()) {
    throw ManifestError("manifest: recorded psi " + std::to_string(recorded) +
                        " disagrees with the stored factors");
  }
  return bundle;
}

}  // namespace mrc
