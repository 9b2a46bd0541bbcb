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

#ifndef MRC_COST_HPP
#define MRC_COST_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mrc {

/// Multiplications for X (n x k) times the factored weight, computed as
/// (X U) V^T + (X G) Y^T: n*k*r + n*r*m + n*k*q + n*q*m.
double factored_multiplications(double n, double k, double m, double r, double q);

/// Factored over dense (n*k*m) multiplication count, from the explicit sum.
/// All arguments must be positive.
double cost_ratio(double n, double k, double m, double r, double q);

/// Closed form (r + q)(k + m) / (k m) of the same ratio.
double cost_ratio_closed_form(double k, double m, double r, double q);

struct LayerCost {
  std::string layer;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t r = 0;
  std::size_t q = 0;
  double original = 0.0;
  double factored = 0.0;
  double ratio = 0.0;
  /// True when the factored form is not cheaper (ratio >= 1).
  bool flagged = false;
};

struct CostReport {
  std::size_t sequence_length = 0;
  std::vector<LayerCost> layers;
  double total_original = 0.0;
  double total_factored = 0.0;
  double total_ratio = 0.0;
};

struct CostInput {
  std::string layer;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t r = 0;
  std::size_t q = 0;
};

CostReport cost_report(std::span<const CostInput> layers, std::size_t sequence_length);

std::string cost_csv(const CostReport& report);

/// A group of stored values at a given width, e.g. the codes of one factor.
struct StorageItem {
  std::size_t values = 0;
  unsigned bits = 16;
};

double storage_bytes(std::span<const StorageItem> items);

struct SizeReport {
  std::size_t params = 0;
  double bytes = 0.0;
  double fp16_baseline_bytes = 0.0;
  /// fp16_baseline_bytes / bytes
  double reduction_vs_fp16 = 0.0;
};

}  // namespace mrc

#endif  // MRC_COST_HPP
