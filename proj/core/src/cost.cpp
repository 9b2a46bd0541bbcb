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

#include "mrc/cost.hpp"

#include <cstdio>

#include "mrc/error.hpp"

namespace mrc {

double factored_multiplications(double n, double k, double m, double r, double q) {
  return n * k * r + n * r * m + n * k * q + n * q * m;
}

double cost_ratio(double n, double k, double m, double r, double q) {
  if (!(n > 0 && k > 0 && m > 0 && r > 0 && q > 0)) {
    throw ArgumentError("cost_ratio: all dimensions must be positive");
  }
  return factored_multiplications(n, k, m, r, q) / (n * k * m);
}

double cost_ratio_closed_form(double k, double m, double r, double q) {
  return (r + q) * (k + m) / (k * m);
}

CostReport cost_report(std::span<const CostInput> layers, std::size_t sequence_length) {
  if (sequence_length == 0) throw ArgumentError("cost_report: sequence length must be positive");
  CostReport report;
  report.sequence_length = sequence_length;
  const auto n = static_cast<double>(sequence_length);
  for (const CostInput& in : layers) {
    LayerCost c;
    c.layer = in.layer;
    c.k = in.k;
    c.m = in.m;
    c.r = in.r;
    c.q = in.q;
    const auto k = static_cast<double>(in.k);
    const auto m = static_cast<double>(in.m);
    c.original = n * k * m;
    c.factored = factored_multiplications(n, k, m, static_cast<double>(in.r),
                                          static_cast<double>(in.q));
    c.ratio = c.factored / c.original;
    c.flagged = c.ratio >= 1.0;
    report.total_original += c.original;
    report.total_factored += c.factored;
    report.layers.push_back(std::move(c));
  }
  report.total_ratio =
      report.total_original > 0.0 ? report.total_factored / report.total_original : 0.0;
  return report;
}

std::string cost_csv(const CostReport& report) {
  std::string out = "layer,k,m,r,q,original_mults,factored_mults,ratio,flagged\n";
  char buf[256];
  for (const LayerCost& c : report.layers) {
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%zu,%zu,%.17g,%.17g,%.17g,%d\n", c.k, c.m, c.r, c.q,
                  c.original, c.factored, c.ratio, c.flagged ? 1 : 0);
    out += c.layer + buf;
  }
  std::snprintf(buf, sizeof buf, "total,,,,,%.17g,%.17g,%.17g,%d\n", report.total_original,
                report.total_factored, report.total_ratio, report.total_ratio >= 1.0 ? 1 : 0);
  out += buf;
  return out;
}

double storage_bytes(std::span<const StorageItem> items) {
  double bits = 0.0;
  for (const StorageItem& it : items) bits += static_cast<double>(it.values) * it.bits;
  return bits / 8.0;
}

}  // namespace mrc
