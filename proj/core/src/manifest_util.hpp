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

#ifndef MRC_SRC_MANIFEST_UTIL_HPP
#define MRC_SRC_MANIFEST_UTIL_HPP

#include <json.hpp>
#include <string>

#include "mrc/error.hpp"

namespace mrc::detail {

using json = nlohmann::json;

template <typename T>
T field(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object()) throw ManifestError(context + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ManifestError(context + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(context + ": bad field '" + key + "': " + e.what());
  }
}

inline json parse_manifest(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("manifest.json: ") + e.what());
  }
}

}  // namespace mrc::detail

#endif  // MRC_SRC_MANIFEST_UTIL_HPP
