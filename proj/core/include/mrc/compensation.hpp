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

#ifndef MRC_COMPENSATION_HPP
#define MRC_COMPENSATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrc/factors.hpp"
#include "mrc/model.hpp"

namespace mrc {

struct GdConfig {
  double learning_rate = 1e-3;
  std::size_t iterations = 2000;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Full-proxy loss is evaluated every this many iterations.
  std::size_t checkpoint_every = 100;
  /// Standard deviation of the Gaussian initialization of g; y starts at 0.
  double init_stddev = 1e-3;
};

/// One calibration sample scaled by 1/||x W||:
/// a = x / ||x W||, b = x (W - u v^T) / ||x W||.
struct NormalizedPair {
  DenseMatrix a;
  DenseMatrix b;
};

/// Compensation rank for an n x d layer: max(1, floor(fraction * n * d / (n + d))).
/// Requires 0 < fraction < 1.
std::size_t comp_rank(std::size_t n, std::size_t d, double fraction);

/// Returns nullopt when x W is identically zero (the sample is skipped).
std::optional<NormalizedPair> normalize_sample(const DenseMatrix& x, const LayerRecord& layer,
                                               const LowRankFactors& factors);

/// Same, with the residual weight W - u v^T precomputed.
std::optional<NormalizedPair> normalize_sample(const DenseMatrix& x, const DenseMatrix& weight,
                                               const DenseMatrix& residual_weight);

/// (1/|batch|) * sum ||a g y^T - b||_F^2
double loss(std::span<const NormalizedPair> pairs, const DenseMatrix& g, const DenseMatrix& y);

struct Gradients {
  DenseMatrix dg;
  DenseMatrix dy;
};

/// dL/dG = (1/|batch|) sum 2 a^T (a g y^T - b) y
/// dL/dY = (1/|batch|) sum 2 (a g y^T - b)^T a g
Gradients gradients(std::span<const NormalizedPair> pairs, const DenseMatrix& g,
                    const DenseMatrix& y);

struct ConvergencePoint {
  std::size_t iteration = 0;
  double batch_loss = 0.0;
  /// Present at checkpoints only.
  std::optional<double> full_loss;
};

struct CompensationLog {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t skipped_samples = 0;
  std::vector<ConvergencePoint> points;
};

struct CompensationResult {
  CompensationFactors factors;
  CompensationLog log;
};

/// Fits g y^T (rank q) to the residual of `factors` by mini-batch gradient
/// descent on the calibration samples.
///
/// Requires 1 <= q < factors.rank(). The returned factors never have a
/// higher full-proxy loss than the zero product. Throws DivergenceError when
/// the loss or gradients stop being finite.
CompensationResult compensate(const LayerRecord& layer, const LowRankFactors& factors,
                              std::span<const DenseMatrix> samples, std::size_t q,
                              const GdConfig& config);

/// CSV rows layer,iteration,batch_loss,full_loss (full_loss empty between
/// checkpoints), without a header so several layers can be concatenated.
std::string convergence_csv(const std::string& layer, const CompensationLog& log);

/// Parameter-matched alternatives to the low-rank correction, fitted in
/// closed form. Used only for comparison.
enum class ResidualBaseline { UnstructuredSparse, StructuredSparse, Diagonal };

std::string_view to_string(ResidualBaseline kind) noexcept;

/// Correction matrix Z (n x d) with at most `param_budget` free values:
///  - UnstructuredSparse keeps the largest-magnitude entries of W - u v^T,
///  - StructuredSparse keeps whole columns of W - u v^T with the largest norms,
///  - Diagonal solves the normalized least-squares problem over diag(Z).
DenseMatrix baseline_compensation(ResidualBaseline kind, const LayerRecord& layer,
                                  const LowRankFactors& factors,
                                  std::span<const DenseMatrix> samples, std::size_t param_budget);

}  // namespace mrc

#endif  // MRC_COMPENSATION_HPP
