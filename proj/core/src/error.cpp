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

#include "mrc/error.hpp"

namespace mrc {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Argument: return "argument";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::MissingFile: return "missing-file";
    case ErrorCategory::DimensionMismatch: return "dimension-mismatch";
    case ErrorCategory::NonFinite: return "non-finite";
    case ErrorCategory::Manifest: return "manifest";
    case ErrorCategory::Infeasible: return "infeasible";
    case ErrorCategory::Convergence: return "convergence";
    case ErrorCategory::Divergence: return "divergence";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Argument: return 2;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::MissingFile: return 3;
    case ErrorCategory::DimensionMismatch: return 4;
    case ErrorCategory::NonFinite: return 4;
    case ErrorCategory::Manifest: return 4;
    case ErrorCategory::Infeasible: return 5;
    case ErrorCategory::Convergence: return 6;
    case ErrorCategory::Divergence: return 6;
  }
  return 1;
}

}  // namespace mrc
