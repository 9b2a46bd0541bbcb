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

#include "mrc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mrc {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DenseMatrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

DenseMatrix random_orthogonal(Rng& rng, std::size_t n) {
  // Rows of g are orthonormalized in order (modified Gram-Schmidt, two passes).
  DenseMatrix g = gaussian_matrix(rng, n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto vi = g.row(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        auto vj = g.row(j);
        const double proj = std::inner_product(vi.begin(), vi.end(), vj.begin(), 0.0);
        for (std::size_t t = 0; t < n; ++t) vi[t] -= proj * vj[t];
      }
    }
    const double norm = std::sqrt(std::inner_product(vi.begin(), vi.end(), vi.begin(), 0.0));
    for (double& v : vi) v /= norm;
  }
  return g;
}

std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace mrc
