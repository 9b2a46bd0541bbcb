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

#ifndef MRC_ERROR_HPP
#define MRC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrc {

/// Coarse failure class. The CLI maps each category to an exit code and
/// prints its name so callers can branch on it without parsing messages.
enum class ErrorCategory {
  Argument,
  Io,
  MissingFile,
  DimensionMismatch,
  NonFinite,
  Manifest,
  Infeasible,
  Convergence,
  Divergence,
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorCategory::Argument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

class MissingFileError : public Error {
 public:
  explicit MissingFileError(const std::string& what)
      : Error(ErrorCategory::MissingFile, what) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& what)
      : Error(ErrorCategory::DimensionMismatch, what) {}
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& what) : Error(ErrorCategory::NonFinite, what) {}
};

class ManifestError : public Error {
 public:
  explicit ManifestError(const std::string& what) : Error(ErrorCategory::Manifest, what) {}
};

/// The requested compression factor cannot be met even at minimum ranks.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double achievable)
      : Error(ErrorCategory::Infeasible, what), achievable_(achievable) {}

  /// Largest compression factor reachable with every layer at its rank floor.
  double achievable() const noexcept { return achievable_; }

 private:
  double achievable_;
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorCategory::Convergence, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration, double learning_rate)
      : Error(ErrorCategory::Divergence, what),
        iteration_(iteration),
        learning_rate_(learning_rate) {}

  long iteration() const noexcept { return iteration_; }
  double learning_rate() const noexcept { return learning_rate_; }

 private:
  long iteration_;
  double learning_rate_;
};

}  // namespace mrc

#endif  // MRC_ERROR_HPP
