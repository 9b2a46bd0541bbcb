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

#ifndef MRC_FACTORS_HPP
#define MRC_FACTORS_HPP

#include <cstddef>

#include "mrc/matrix.hpp"

namespace mrc {

/// Principal low-rank pair replacing W ~= u * v^T; u is n x r, v is d x r.
struct LowRankFactors {
  DenseMatrix u;
  DenseMatrix v;

  std::size_t rank() const noexcept { return u.cols(); }
  DenseMatrix product() const { return matmul_nt(u, v); }
};

/// Residual correction g * y^T; g is n x q, y is d x q.
struct CompensationFactors {
  DenseMatrix g;
  DenseMatrix y;

  std::size_t rank() const noexcept { return g.cols(); }
  DenseMatrix product() const { return matmul_nt(g, y); }
};

}  // namespace mrc

#endif  // MRC_FACTORS_HPP
