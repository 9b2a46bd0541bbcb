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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "mrc/error.hpp"
#include "mrc/linalg.hpp"
#include "mrc/random.hpp"
#include "oracles.hpp"

using mrc::DenseMatrix;

namespace {

double orthonormality_error_cols(const DenseMatrix& u) {
  const DenseMatrix g = oracle::mul(oracle::transpose(u), u);
  double err = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

DenseMatrix naive_reconstruct(const mrc::SvdResult& s) {
  DenseMatrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i) {
    for (std::size_t j = 0; j < s.sigma.size(); ++j) us(i, j) *= s.sigma[j];
  }
  return oracle::mul(us, s.vt);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("matrix construction rejects bad shapes and non-finite data") {
  CHECK_THROWS_AS(DenseMatrix(0, 3), mrc::ArgumentError);
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), mrc::DimensionMismatchError);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), mrc::NonFiniteError);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {std::numeric_limits<double>::infinity()}),
                  mrc::NonFiniteError);
  DenseMatrix m(2, 3);
  CHECK(m.size() == 6);
  CHECK(mrc::squared_norm(m) == 0.0);
}

TEST_CASE("matrix products agree with the loop oracle") {
  mrc::Rng rng(3);
  const DenseMatrix a = oracle::random_matrix(rng, 5, 4);
  const DenseMatrix b = oracle::random_matrix(rng, 4, 6);
  const DenseMatrix c = oracle::random_matrix(rng, 5, 6);
  CHECK(oracle::max_abs(mrc::matmul(a, b) - oracle::mul(a, b)) < 1e-14);
  CHECK(oracle::max_abs(mrc::matmul_tn(a, c) - oracle::mul(oracle::transpose(a), c)) < 1e-14);
  CHECK(oracle::max_abs(mrc::matmul_nt(b.transposed(), a) -
                        oracle::mul(oracle::transpose(b), oracle::transpose(a))) < 1e-14);
  CHECK_THROWS_AS(mrc::matmul(a, c), mrc::DimensionMismatchError);
}

TEST_CASE("svd of the identity") {
  const auto s = mrc::svd(DenseMatrix::identity(3));
  REQUIRE(s.sigma.size() == 3);
  for (double v : s.sigma) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd of a rank-1 outer product") {
  const DenseMatrix a = DenseMatrix(4, 1, {1.0, -2.0, 0.5, 3.0});
  const DenseMatrix b = DenseMatrix(3, 1, {2.0, 1.0, -1.0});
  const auto s = mrc::svd(mrc::matmul_nt(a, b));
  const double expected = std::sqrt(mrc::squared_norm(a) * mrc::squared_norm(b));
  CHECK(s.sigma[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s.sigma[1] < 1e-12 * expected);
  CHECK(s.sigma[2] < 1e-12 * expected);
}

TEST_CASE("svd of a random 8x6 matrix reproduces it") {
  mrc::Rng rng(11);
  const DenseMatrix m = oracle::random_matrix(rng, 8, 6);
  const auto s = mrc::svd(m);
  CHECK(oracle::max_abs(naive_reconstruct(s) - m) < 1e-10);
  CHECK(orthonormality_error_cols(s.u) < 1e-8);
  CHECK(orthonormality_error_cols(s.vt.transposed()) < 1e-8);
}

TEST_CASE("svd singular values match an independent decomposition") {
  mrc::Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    std::uniform_int_distribution<std::size_t> dim(1, 12);
    const DenseMatrix m = oracle::random_matrix(rng, dim(rng), dim(rng));
    const auto ours = mrc::singular_values(m);
    const auto ref = oracle::singular_values(m);
    REQUIRE(ours.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(ours[i] - ref[i]) < 1e-10 * std::max(1.0, ref[0]));
    }
  }
}

TEST_CASE("svd handles wide, rank-deficient and zero matrices") {
  mrc::Rng rng(13);
  const DenseMatrix wide = oracle::random_matrix(rng, 3, 9);
  auto s = mrc::svd(wide);
  CHECK(s.u.rows() == 3);
  CHECK(s.vt.cols() == 9);
  CHECK(oracle::max_abs(naive_reconstruct(s) - wide) < 1e-10);
  CHECK(orthonormality_error_cols(s.vt.transposed()) < 1e-8);

  DenseMatrix deficient = oracle::mul(oracle::random_matrix(rng, 7, 2), oracle::random_matrix(rng, 2, 5));
  s = mrc::svd(deficient);
  CHECK(s.sigma[2] < 1e-12 * s.sigma[0]);
  CHECK(orthonormality_error_cols(s.u) < 1e-8);
  CHECK(orthonormality_error_cols(s.vt.transposed()) < 1e-8);

  s = mrc::svd(DenseMatrix(4, 3));
  for (double v : s.sigma) CHECK(v == 0.0);
  CHECK(orthonormality_error_cols(s.u) < 1e-8);
}

TEST_CASE("truncate keeps the leading triplets") {
  SUBCASE("full rank is a no-op") {
    mrc::Rng rng(14);
    const DenseMatrix m = oracle::random_matrix(rng, 5, 4);
    const auto s = mrc::svd(m);
    CHECK(oracle::max_abs(mrc::reconstruct(mrc::truncate(s, 4)) - m) < 1e-10);
  }
  SUBCASE("diag(3,2,1) at rank 2 leaves residual energy 1") {
    const double d[] = {3.0, 2.0, 1.0};
    const DenseMatrix m = DenseMatrix::diagonal(d);
    const auto t = mrc::truncate(mrc::svd(m), 2);
    CHECK(mrc::squared_distance(mrc::reconstruct(t), m) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("random 6x6 residual equals the tail sum at every rank") {
    mrc::Rng rng(15);
    const DenseMatrix m = oracle::random_matrix(rng, 6, 6);
    const auto s = mrc::svd(m);
    for (std::size_t r = 1; r <= 6; ++r) {
      const DenseMatrix approx = mrc::reconstruct(mrc::truncate(s, r));
      const double residual = oracle::sq_norm(oracle::sub(m, approx));
      CHECK(std::abs(residual - oracle::tail_energy(s.sigma, r)) < 1e-9);
    }
  }
  SUBCASE("out of range ranks are rejected") {
    const auto s = mrc::svd(DenseMatrix::identity(3));
    CHECK_THROWS_AS(mrc::truncate(s, 0), mrc::ArgumentError);
    CHECK_THROWS_AS(mrc::truncate(s, 4), mrc::ArgumentError);
  }
}

TEST_CASE("property: truncated reconstruction has exactly r nonzero singular values") {
  mrc::Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix m = oracle::random_matrix(rng, 7, 5);
    const auto s = mrc::svd(m);
    for (std::size_t r = 1; r <= 5; ++r) {
      const auto sv = mrc::singular_values(mrc::reconstruct(mrc::truncate(s, r)));
      std::size_t nonzero = 0;
      for (double v : sv) nonzero += v > 1e-10 * sv[0];
      CHECK(nonzero == r);
    }
  }
}

TEST_CASE("pinv") {
  SUBCASE("identity") {
    CHECK(oracle::max_abs(mrc::pinv(DenseMatrix::identity(4)) - DenseMatrix::identity(4)) <
          1e-14);
  }
  SUBCASE("diag(2, 0) keeps the zero") {
    const double d[] = {2.0, 0.0};
    const DenseMatrix p = mrc::pinv(DenseMatrix::diagonal(d));
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p(1, 1) == 0.0);
    CHECK(p(0, 1) == 0.0);
    CHECK(p(1, 0) == 0.0);
  }
  SUBCASE("rcond outside (0, 1) is rejected") {
    CHECK_THROWS_AS(mrc::pinv(DenseMatrix::identity(2), 0.0), mrc::ArgumentError);
    CHECK_THROWS_AS(mrc::pinv(DenseMatrix::identity(2), 1.0), mrc::ArgumentError);
  }
}

TEST_CASE("property: pseudo-inverse satisfies the four Moore-Penrose conditions") {
  mrc::Rng rng(17);
  auto check = [](const DenseMatrix& m) {
    const DenseMatrix x = mrc::pinv(m);
    const DenseMatrix mx = oracle::mul(m, x);
    const DenseMatrix xm = oracle::mul(x, m);
    CHECK(oracle::max_abs(oracle::sub(oracle::mul(mx, m), m)) < 1e-8);
    CHECK(oracle::max_abs(oracle::sub(oracle::mul(xm, x), x)) < 1e-8);
    CHECK(oracle::max_abs(oracle::sub(mx, oracle::transpose(mx))) < 1e-8);
    CHECK(oracle::max_abs(oracle::sub(xm, oracle::transpose(xm))) < 1e-8);
  };
  check(oracle::random_matrix(rng, 7, 4));
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<std::size_t> dim(1, 9);
    check(oracle::random_matrix(rng, dim(rng), dim(rng)));
  }
  // rank deficient: 6x5 of rank 2
  check(oracle::mul(oracle::random_matrix(rng, 6, 2), oracle::random_matrix(rng, 2, 5)));
}

TEST_CASE("frob_energy") {
  CHECK(mrc::frob_energy(DenseMatrix(3, 3)) == 0.0);
  const double d[] = {3.0, 4.0};
  CHECK(mrc::frob_energy(DenseMatrix::diagonal(d)) == 25.0);
  mrc::Rng rng(18);
  const DenseMatrix m = oracle::random_matrix(rng, 9, 5);
  CHECK(mrc::frob_energy(m) ==
        doctest::Approx(oracle::tail_energy(mrc::singular_values(m), 0)).epsilon(1e-9));
}

TEST_CASE("property: frob_energy is invariant under orthogonal multiplication") {
  mrc::Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix m = oracle::random_matrix(rng, 6, 4);
    const DenseMatrix q1 = mrc::random_orthogonal(rng, 6);
    const DenseMatrix q2 = mrc::random_orthogonal(rng, 4);
    const double rotated = mrc::frob_energy(oracle::mul(oracle::mul(q1, m), q2));
    CHECK(oracle::rel_close(rotated, mrc::frob_energy(m), 1e-9));
  }
}

TEST_CASE("property: tail identity over random shapes and all ranks") {
  mrc::Rng rng(20);
  std::uniform_int_distribution<std::size_t> dim(2, 16);
  for (int t = 0; t < 60; ++t) {
    const DenseMatrix m = oracle::random_matrix(rng, dim(rng), dim(rng));
    const auto s = mrc::svd(m);
    for (std::size_t r = 1; r <= s.rank(); ++r) {
      const double residual = oracle::sq_norm(oracle::sub(m, mrc::reconstruct(mrc::truncate(s, r))));
      const double tail = oracle::tail_energy(s.sigma, r);
      CHECK(std::abs(residual - tail) <= 1e-9 * std::max(tail, 1e-12 * mrc::frob_energy(m)));
    }
  }
}

TEST_CASE("property: sigma is non-increasing and non-negative") {
  mrc::Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    std::uniform_int_distribution<std::size_t> dim(1, 10);
    const auto sv = mrc::singular_values(oracle::random_matrix(rng, dim(rng), dim(rng)));
    for (std::size_t i = 0; i < sv.size(); ++i) {
      CHECK(sv[i] >= 0.0);
      if (i > 0) CHECK(sv[i] <= sv[i - 1]);
    }
  }
}

}  // TEST_SUITE
