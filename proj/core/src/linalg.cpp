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

#include "mrc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mrc/error.hpp"

namespace mrc {

namespace {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

struct JacobiOutput {
  // Rows are the rotated columns of the input (length = input rows).
  DenseMatrix cols;
  // Rows are the right singular vectors (length = input cols).
  DenseMatrix right;
};

// One-sided Jacobi on a tall matrix (rows >= cols). Orthogonalizes the
// columns in place and accumulates the rotations.
JacobiOutput jacobi_tall(const DenseMatrix& a, bool want_vectors) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  JacobiOutput out{a.transposed(), want_vectors ? DenseMatrix::identity(n) : DenseMatrix{}};

  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(m);
  const std::size_t max_sweeps = 100 * n;

  for (std::size_t sweep = 0;; ++sweep) {
    if (sweep >= max_sweeps) {
      throw ConvergenceError("svd: Jacobi rotations did not converge for " +
                             std::to_string(m) + "x" + std::to_string(n) + " matrix after " +
                             std::to_string(max_sweeps) + " sweeps");
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* gp = out.cols.row(p).data();
        double* gq = out.cols.row(q).data();
        const double alpha = dot(gp, gp, m);
        const double beta = dot(gq, gq, m);
        const double gamma = dot(gp, gq, m);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = gp[i];
          const double y = gq[i];
          gp[i] = c * x - s * y;
          gq[i] = s * x + c * y;
        }
        if (want_vectors) {
          double* vp = out.right.row(p).data();
          double* vq = out.right.row(q).data();
          for (std::size_t i = 0; i < n; ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - s * y;
            vq[i] = s * x + c * y;
          }
        }
      }
    }
    if (!rotated) break;
  }
  return out;
}

// Fills `basis` rows flagged in `missing` with unit vectors orthogonal to
// every other row.
void complete_orthonormal(DenseMatrix& basis, const std::vector<bool>& missing) {
  const std::size_t k = basis.rows();
  const std::size_t len = basis.cols();
  std::vector<bool> done(k);
  for (std::size_t i = 0; i < k; ++i) done[i] = !missing[i];

  std::size_t candidate = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (done[i]) continue;
    for (; candidate < len; ++candidate) {
      std::vector<double> v(len, 0.0);
      v[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
          if (!done[j]) continue;
          const double* b = basis.row(j).data();
          const double proj = dot(v.data(), b, len);
          for (std::size_t t = 0; t < len; ++t) v[t] -= proj * b[t];
        }
      }
      const double norm = std::sqrt(dot(v.data(), v.data(), len));
      if (norm > 0.5) {
        auto row = basis.row(i);
        for (std::size_t t = 0; t < len; ++t) row[t] = v[t] / norm;
        done[i] = true;
        ++candidate;
        break;
      }
    }
  }
}

SvdResult svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  JacobiOutput j = jacobi_tall(a, true);

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = j.cols.row(i).data();
    norms[i] = std::sqrt(dot(g, g, m));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const double sigma_max = norms[order[0]];
  const double cutoff =
      sigma_max * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(m, n));

  SvdResult out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
  DenseMatrix ut(n, m);
  std::vector<bool> missing(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    out.sigma[i] = norms[src];
    std::copy_n(j.right.row(src).begin(), n, out.vt.row(i).begin());
    if (norms[src] > cutoff && norms[src] > 0.0) {
      auto g = j.cols.row(src);
      auto dst = ut.row(i);
      for (std::size_t t = 0; t < m; ++t) dst[t] = g[t] / norms[src];
    } else {
      missing[i] = true;
    }
  }
  complete_orthonormal(ut, missing);
  out.u = ut.transposed();
  return out;
}

}  // namespace

SvdResult svd(const DenseMatrix& m) {
  if (m.empty()) throw ArgumentError("svd: empty matrix");
  if (!m.all_finite()) throw NonFiniteError("svd: non-finite input");
  if (m.rows() >= m.cols()) return svd_tall(m);

  // Wide input: decompose the transpose and swap the factors.
  SvdResult t = svd_tall(m.transposed());
  return SvdResult{t.vt.transposed(), std::move(t.sigma), t.u.transposed()};
}

std::vector<double> singular_values(const DenseMatrix& m) {
  if (m.empty()) throw ArgumentError("singular_values: empty matrix");
  if (!m.all_finite()) throw NonFiniteError("singular_values: non-finite input");
  const DenseMatrix tall = m.rows() >= m.cols() ? m : m.transposed();
  JacobiOutput j = jacobi_tall(tall, false);
  std::vector<double> s(tall.cols());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double* g = j.cols.row(i).data();
    s[i] = std::sqrt(dot(g, g, tall.rows()));
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

SvdResult truncate(const SvdResult& s, std::size_t r) {
  if (r < 1 || r > s.rank()) {
    throw ArgumentError("truncate: rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(s.rank()) + "]");
  }
  return SvdResult{s.u.left_columns(r),
                   std::vector<double>(s.sigma.begin(), s.sigma.begin() + static_cast<long>(r)),
                   s.vt.top_rows(r)};
}

DenseMatrix reconstruct(const SvdResult& s) {
  DenseMatrix scaled = s.u;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    auto row = scaled.row(i);
    for (std::size_t j = 0; j < s.rank(); ++j) row[j] *= s.sigma[j];
  }
  return matmul(scaled, s.vt);
}

DenseMatrix pinv(const DenseMatrix& m, double rcond) {
  if (!(rcond > 0.0 && rcond < 1.0)) {
    throw ArgumentError("pinv: rcond must lie in (0, 1), got " + std::to_string(rcond));
  }
  const SvdResult s = svd(m);
  const double cutoff = rcond * s.sigma.front();

  // pinv = V * diag(1/sigma) * U^T, built as (vt)^T * (diag(1/sigma) * u^T).
  DenseMatrix scaled_ut = s.u.transposed();
  for (std::size_t i = 0; i < s.rank(); ++i) {
    const double inv = s.sigma[i] > cutoff ? 1.0 / s.sigma[i] : 0.0;
    for (double& v : scaled_ut.row(i)) v *= inv;
  }
  return matmul_tn(s.vt, scaled_ut);
}

double frob_energy(const DenseMatrix& m) noexcept { return squared_norm(m); }

}  // namespace mrc
