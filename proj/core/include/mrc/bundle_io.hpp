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

#ifndef MRC_BUNDLE_IO_HPP
#define MRC_BUNDLE_IO_HPP

#include <filesystem>
#include <functional>
#include <string>

#include "mrc/model.hpp"

namespace mrc {

/// Manifest file name inside every bundle directory.
inline constexpr const char* kManifestName = "manifest.json";

/// Reads and fully validates a model bundle directory.
ModelBundle load_bundle(const std::filesystem::path& dir);

/// Writes `bundle` to `dir`, replacing any previous content as a unit.
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);

/// Runs `fill` against a fresh staging directory, then swaps it into place
/// at `dir`. On failure the staging directory is removed and `dir` is left
/// as it was.
void write_directory_atomically(const std::filesystem::path& dir,
                                const std::function<void(const std::filesystem::path&)>& fill);

/// File-name-safe stem for layer `index` named `name`.
std::string layer_file_stem(std::size_t index, const std::string& name);

}  // namespace mrc

#endif  // MRC_BUNDLE_IO_HPP
