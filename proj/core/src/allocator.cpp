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

#include "mrc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mrc/error.hpp"

namespace mrc {

namespace {

std::size_t factor_params(std::span<const LayerShape> shapes, std::span<const std::size_t> ranks) {
  std::size_t total = 0;
  for (std::size_t l = 0; l < shapes.size(); ++l) total += (shapes[l].n + shapes[l].d) * ranks[l];
  return total;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<LayerShape> layer_shapes(const ModelBundle& bundle) {
  std::vector<LayerShape> out;
  out.reserve(bundle.layers.size());
  for (const LayerRecord& l : bundle.layers) out.push_back({l.n(), l.d()});
  return out;
}

double schedule(const ScheduleParams& params, double iter) {
  return params.n_target + (params.n0 - params.n_target) * std::exp(-iter / params.gamma);
}

double removal_at(const ScheduleParams& params, std::size_t t) {
  const std::size_t step = std::clamp<std::size_t>(t, 1, std::max<std::size_t>(params.max_iters, 1));
  return schedule(params, static_cast<double>(step - 1)) - schedule(params, static_cast<double>(step));
}

double psi(std::span<const LayerShape> shapes, std::span<const std::size_t> ranks) {
  return psi_total(shapes, ranks, 0);
}

double psi_total(std::span<const LayerShape> shapes, std::span<const std::size_t> ranks,
                 std::size_t extra_params) {
  if (shapes.size() != ranks.size()) throw ArgumentError("psi: rank count differs from layer count");
  std::size_t original = 0;
  for (const LayerShape& s : shapes) original += s.n * s.d;
  const std::size_t compressed = factor_params(shapes, ranks) + extra_params;
  return static_cast<double>(original) / static_cast<double>(compressed);
}

Allocation allocate(std::span<const LayerShape> shapes, std::span<const SingularSpectrum> spectra,
                    double alpha, const AllocatorOptions& options) {
  if (!(alpha > 1.0)) throw ArgumentError("allocate: alpha must exceed 1");
  if (spectra.size() != shapes.size()) {
    throw ArgumentError("allocate: " + std::to_string(spectra.size()) + " spectra for " +
                        std::to_string(shapes.size()) + " layers");
  }
  if (!(options.gamma > 0.0)) throw ArgumentError("allocate: gamma must be positive");
  const bool compensated = !options.compensation_ranks.empty();
  if (compensated && options.compensation_ranks.size() != shapes.size()) {
    throw ArgumentError("allocate: compensation ranks do not cover every layer");
  }

  const std::size_t count = shapes.size();
  RankConfig ranks(count);
  std::vector<std::size_t> floors(count, 1);
  std::size_t original = 0;
  std::size_t reserved = 0;
  for (std::size_t l = 0; l < count; ++l) {
    const LayerShape& s = shapes[l];
    original += s.n * s.d;
    ranks[l] = std::min({s.n, s.d, spectra[l].size()});
    if (compensated) {
      floors[l] = options.compensation_ranks[l] + 1;
      reserved += options.compensation_ranks[l] * (s.n + s.d);
    }
    if (ranks[l] < floors[l]) {
      throw InfeasibleError("layer " + std::to_string(l) + ": initial rank " +
                                std::to_string(ranks[l]) + " cannot exceed compensation rank " +
                                std::to_string(floors[l] - 1),
                            0.0);
    }
  }

  const double budget = static_cast<double>(original) / alpha - static_cast<double>(reserved);
  const std::size_t floor_params = factor_params(shapes, floors);
  if (static_cast<double>(floor_params) > budget) {
    const double achievable =
        static_cast<double>(original) / static_cast<double>(floor_params + reserved);
    throw InfeasibleError("compression factor " + fmt_double(alpha) +
                              " unreachable; at most " + fmt_double(achievable) +
                              " with every layer at its minimum rank",
                          achievable);
  }

  Allocation out;
  out.trace.initial_ranks = ranks;
  std::size_t current = factor_params(shapes, ranks);
  out.trace.initial_params = current + reserved;
  out.trace.target_params = static_cast<double>(original) / alpha;
  out.trace.schedule = ScheduleParams{static_cast<double>(current), budget, options.gamma,
                                      options.max_iters};

  for (std::size_t t = 1; static_cast<double>(current) > budget; ++t) {
    const double removal = removal_at(out.trace.schedule, t);
    AllocationStep step;
    step.iter = t;
    step.removal = removal;
    step.candidate_losses.assign(count, -1.0);

    bool found = false;
    std::size_t best_layer = 0;
    std::size_t best_rank = 0;
    double best_loss = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
      if (ranks[l] <= floors[l]) continue;
      const double width = static_cast<double>(shapes[l].n + shapes[l].d);
      const auto decrement =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(removal / width)));
      const std::size_t keep =
          ranks[l] - std::min(decrement, ranks[l] - floors[l]);
      const double loss = energy_loss(spectra[l], keep);
      step.candidate_losses[l] = loss;
      if (!found || loss < best_loss) {
        found = true;
        best_layer = l;
        best_rank = keep;
        best_loss = loss;
      }
    }
    if (!found) {
      // Unreachable given the floor check above; kept as a guard.
      throw InfeasibleError("every layer reached its minimum rank before the target", 0.0);
    }

    step.layer = best_layer;
    step.rank_before = ranks[best_layer];
    step.rank_after = best_rank;
    step.energy_loss = best_loss;
    current -= (shapes[best_layer].n + shapes[best_layer].d) * (ranks[best_layer] - best_rank);
    ranks[best_layer] = best_rank;
    step.params_remaining = current + reserved;
    out.trace.steps.push_back(std::move(step));
  }

  out.ranks = std::move(ranks);
  return out;
}

std::string trace_csv(const AllocationTrace& trace) {
  std::string out = "iter,layer,rank_before,rank_after,energy_loss,params_remaining\n";
  for (const AllocationStep& s : trace.steps) {
    out += std::to_string(s.iter) + "," + std::to_string(s.layer) + "," +
           std::to_string(s.rank_before) + "," + std::to_string(s.rank_after) + "," +
           fmt_double(s.energy_loss) + "," + std::to_string(s.params_remaining) + "\n";
  }
  return out;
}

}  // namespace mrc
