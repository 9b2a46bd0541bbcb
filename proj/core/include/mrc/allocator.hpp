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

#ifndef MRC_ALLOCATOR_HPP
#define MRC_ALLOCATOR_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mrc/act_lra.hpp"
#include "mrc/model.hpp"

namespace mrc {

struct LayerShape {
  std::size_t n = 0;
  std::size_t d = 0;
};

std::vector<LayerShape> layer_shapes(const ModelBundle& bundle);

/// Retained rank per layer.
using RankConfig = std::vector<std::size_t>;

/// Exponential parameter-count trajectory
/// tau(t) = n_target + (n0 - n_target) * exp(-t / gamma).
struct ScheduleParams {
  double n0 = 0.0;
  double n_target = 0.0;
  double gamma = 80.0;
  std::size_t max_iters = 500;
};

double schedule(const ScheduleParams& params, double iter);

/// Parameters removed at step t >= 1: tau(t - 1) - tau(t). Past max_iters
/// the final step's amount repeats.
double removal_at(const ScheduleParams& params, std::size_t t);

/// Compression ratio sum(n*d) / sum((n + d) * r), factor pairs only.
double psi(std::span<const LayerShape> shapes, std::span<const std::size_t> ranks);

/// Compression ratio counting `extra_params` (e.g. compensation factors) in
/// the denominator.
double psi_total(std::span<const LayerShape> shapes, std::span<const std::size_t> ranks,
                 std::size_t extra_params);

struct AllocatorOptions {
  double gamma = 80.0;
  std::size_t max_iters = 500;
  /// Per-layer compensation rank q; empty means no compensation. When set,
  /// q * (n + d) parameters per layer are reserved and ranks stay above q.
  std::vector<std::size_t> compensation_ranks;
};

struct AllocationStep {
  std::size_t iter = 0;
  std::size_t layer = 0;
  std::size_t rank_before = 0;
  std::size_t rank_after = 0;
  double energy_loss = 0.0;
  double removal = 0.0;
  /// Factor plus reserved compensation parameters after this step.
  std::size_t params_remaining = 0;
  /// Tentative loss of every layer this iteration; -1 marks non-candidates.
  std::vector<double> candidate_losses;
};

struct AllocationTrace {
  ScheduleParams schedule;
  std::size_t initial_params = 0;
  double target_params = 0.0;
  RankConfig initial_ranks;
  std::vector<AllocationStep> steps;
};

struct Allocation {
  RankConfig ranks;
  AllocationTrace trace;
};

/// Greedy mixed-rank search: at each step every layer tentatively drops
/// ceil(p_t / (n + d)) ranks and the layer with the smallest resulting
/// normalized energy loss commits. Stops once factor plus compensation
/// parameters fit within sum(n*d) / alpha.
///
/// Throws ArgumentError for alpha <= 1 or mismatched inputs and
/// InfeasibleError when even the rank floors cannot meet alpha.
Allocation allocate(std::span<const LayerShape> shapes, std::span<const SingularSpectrum> spectra,
                    double alpha, const AllocatorOptions& options);

/// CSV with header iter,layer,rank_before,rank_after,energy_loss,params_remaining.
std::string trace_csv(const AllocationTrace& trace);

}  // namespace mrc

#endif  // MRC_ALLOCATOR_HPP
