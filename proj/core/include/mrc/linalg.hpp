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

#ifndef MRC_LINALG_HPP
#define MRC_LINALG_HPP

#include <cstddef>
#include <vector>

#include "mrc/matrix.hpp"

namespace mrc {

/// Thin singular value decomposition m = u * diag(sigma) * vt.
///
/// For an n x d input with k = min(n, d): u is n x k with orthonormal
/// columns, sigma is non-increasing and non-negative, vt is k x d with
/// orthonormal rows. After truncation k may be smaller.
struct SvdResult {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix vt;

  std::size_t rank() const noexcept { return sigma.size(); }
};

/// Default relative cutoff for pseudo-inverse singular values.
inline constexpr double kDefaultRcond = 1e-10;

/// Thin SVD by one-sided Jacobi rotations.
///
/// Throws ConvergenceError (naming the input dimensions) if the rotations
/// have not settled after 100 * min(n, d) sweeps.
SvdResult svd(const DenseMatrix& m);

/// Singular values only; same algorithm as svd().
std::vector<double> singular_values(const DenseMatrix& m);

/// Keeps the r largest singular triplets. Requires 1 <= r <= s.rank().
SvdResult truncate(const SvdResult& s, std::size_t r);

/// u * diag(sigma) * vt
DenseMatrix reconstruct(const SvdResult& s);

/// Moore-Penrose pseudo-inverse; singular values at or below
/// rcond * sigma_max are treated as zero. rcond must lie in (0, 1).
DenseMatrix pinv(const DenseMatrix& m, double rcond = kDefaultRcond);

/// Matrix energy: sum of squared entries, equal to the sum of squared
/// singular values.
double frob_energy(const DenseMatrix& m) noexcept;

}  // namespace mrc

#endif  // MRC_LINALG_HPP
