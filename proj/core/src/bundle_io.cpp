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

#include "mrc/bundle_io.hpp"

#include <unistd.h>

#include <cstdio>

#include "manifest_util.hpp"
#include "mrc/error.hpp"
#include "mrc/tensor_io.hpp"

namespace fs = std::filesystem;
using mrc::detail::field;
using mrc::detail::json;

namespace mrc {

namespace {

constexpr const char* kFormat = "mrc-bundle";
constexpr int kVersion = 1;

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

std::string layer_file_stem(std::size_t index, const std::string& name) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu_", index);
  std::string stem = prefix;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    stem.push_back(ok ? c : '_');
  }
  return stem;
}

void write_directory_atomically(const fs::path& dir,
                                const std::function<void(const fs::path&)>& fill) {
  const fs::path target = fs::absolute(dir);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string suffix = std::to_string(::getpid());
  const fs::path staging = target.string() + ".staging-" + suffix;
  const fs::path retired = target.string() + ".retired-" + suffix;

  std::error_code ec;
  fs::remove_all(staging, ec);
  try {
    fs::create_directories(staging);
    fill(staging);
    if (fs::exists(target)) fs::rename(target, retired);
    fs::rename(staging, target);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    if (!fs::exists(target) && fs::exists(retired)) fs::rename(retired, target, ec);
    throw IoError(std::string("writing ") + target.string() + ": " + e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  fs::remove_all(retired, ec);
}

void save_bundle(const ModelBundle& bundle, const fs::path& dir) {
  validate(bundle);
  write_directory_atomically(dir, [&](const fs::path& out) {
    json manifest;
    manifest["format"] = kFormat;
    manifest["version"] = kVersion;
    manifest["metadata"] = bundle.metadata;
    manifest["proxy_samples"] = bundle.proxy.sample_count();
    json layers = json::array();
    for (std::size_t l = 0; l < bundle.layers.size(); ++l) {
      const LayerRecord& layer = bundle.layers[l];
      const std::string stem = layer_file_stem(l, layer.name);
      json entry;
      entry["name"] = layer.name;
      entry["kind"] = std::string(to_string(layer.kind));
      entry["n"] = layer.n();
      entry["d"] = layer.d();
      entry["dtype"] = std::string(kTagF64);
      entry["weight"] = stem + ".weight.mrt";
      write_file(out / (stem + ".weight.mrt"), encode_matrix(layer.weight));
      if (layer.bias) {
        entry["bias"] = stem + ".bias.mrt";
        write_file(out / (stem + ".bias.mrt"),
                   encode_matrix(DenseMatrix(1, layer.d(), *layer.bias)));
      } else {
        entry["bias"] = nullptr;
      }
      if (!bundle.proxy.stacks.empty()) {
        entry["activations"] = stem + ".act.mrt";
        write_file(out / (stem + ".act.mrt"), encode_stack(bundle.proxy.stacks[l].samples));
      } else {
        entry["activations"] = nullptr;
      }
      layers.push_back(std::move(entry));
    }
    manifest["layers"] = std::move(layers);
    write_file(out / kManifestName, manifest.dump(2) + "\n");
  });
}

ModelBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingFileError("bundle directory " + dir.string() + " not found");
  const json manifest = detail::parse_manifest(read_file(dir / kManifestName));
  if (field<std::string>(manifest, "format", "manifest") != kFormat) {
    throw ManifestError("manifest: not a model bundle (format field)");
  }
  if (field<int>(manifest, "version", "manifest") != kVersion) {
    throw ManifestError("manifest: unsupported version");
  }

  ModelBundle bundle;
  if (manifest.contains("metadata")) {
    bundle.metadata = field<std::map<std::string, std::string>>(manifest, "metadata", "manifest");
  }
  const auto declared_samples = field<std::size_t>(manifest, "proxy_samples", "manifest");
  const json layers = field<json>(manifest, "layers", "manifest");
  if (!layers.is_array()) throw ManifestError("manifest: 'layers' is not an array");

  bool any_activations = false;
  for (const json& entry : layers) {
    const std::string name = field<std::string>(entry, "name", "manifest layer");
    const std::string ctx = "layer '" + name + "'";
    LayerRecord layer;
    layer.name = name;
    layer.kind = parse_layer_kind(field<std::string>(entry, "kind", ctx));
    const auto n = field<std::size_t>(entry, "n", ctx);
    const auto d = field<std::size_t>(entry, "d", ctx);
    if (field<std::string>(entry, "dtype", ctx) != kTagF64) {
      throw ManifestError(ctx + ": unsupported dtype");
    }
    layer.weight = decode_matrix(read_file(dir / field<std::string>(entry, "weight", ctx)),
                                 ctx + " weight");
    if (layer.n() != n || layer.d() != d) {
      throw DimensionMismatchError(ctx + ": manifest declares " + dims(n, d) + " but weight is " +
                                   dims(layer.n(), layer.d()));
    }
    if (entry.contains("bias") && !entry.at("bias").is_null()) {
      DenseMatrix b = decode_matrix(read_file(dir / field<std::string>(entry, "bias", ctx)),
                                    ctx + " bias");
      if (b.rows() != 1 || b.cols() != d) {
        throw DimensionMismatchError(ctx + ": bias is " + dims(b.rows(), b.cols()) +
                                     ", expected 1x" + std::to_string(d));
      }
      layer.bias = std::vector<double>(b.data().begin(), b.data().end());
    }
    if (entry.contains("activations") && !entry.at("activations").is_null()) {
      any_activations = true;
      auto samples = decode_stack(
          read_file(dir / field<std::string>(entry, "activations", ctx)), ctx + " activations");
      if (samples.size() != declared_samples) {
        throw DimensionMismatchError(ctx + ": " + std::to_string(samples.size()) +
                                     " activation samples, manifest declares " +
                                     std::to_string(declared_samples));
      }
      bundle.proxy.stacks.push_back(ActivationStack{name, std::move(samples)});
    } else if (any_activations) {
      throw ManifestError(ctx + ": missing activations");
    }
    bundle.layers.push_back(std::move(layer));
  }
  if (any_activations && bundle.proxy.stacks.size() != bundle.layers.size()) {
    throw ManifestError("manifest: activations missing for some layers");
  }
  validate(bundle);
  return bundle;
}

}  // namespace mrc
