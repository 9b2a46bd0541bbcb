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

#ifndef MRC_RANDOM_HPP
#define MRC_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "mrc/matrix.hpp"

namespace mrc {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream index
/// (splitmix64 finalizer), so per-layer work stays reproducible regardless
/// of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

DenseMatrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev = 1.0);

/// Haar-ish random orthogonal matrix from Gram-Schmidt on Gaussian columns.
DenseMatrix random_orthogonal(Rng& rng, std::size_t n);

/// Uniformly shuffled permutation of [0, n).
std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n);

}  // namespace mrc

#endif  // MRC_RANDOM_HPP
